#include "qmarket/quantum/kernels.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <utility>
#include <vector>

namespace qmarket::quantum::kernels {

namespace {

// Index of the pair member with `qubit` cleared, for pair number i.
inline std::size_t pair_base(std::size_t i, std::size_t qubit) {
    const std::size_t low = i & ((std::size_t{1} << qubit) - 1);
    return ((i >> qubit) << (qubit + 1)) | low;
}

inline void rotate_pair(Complex &a0, Complex &a1, const Matrix2 &m) {
    const Complex v0 = a0, v1 = a1;
    a0 = m[0] * v0 + m[1] * v1;
    a1 = m[2] * v0 + m[3] * v1;
}

inline std::size_t qubit_count(std::size_t dim) {
    return static_cast<std::size_t>(std::countr_zero(dim));
}

} // namespace

namespace serial {

void apply_1q(std::span<Complex> amps, std::size_t qubit, const Matrix2 &m) {
    const std::size_t half = amps.size() / 2;
    const std::size_t bit = std::size_t{1} << qubit;
    for (std::size_t i = 0; i < half; ++i) {
        const std::size_t i0 = pair_base(i, qubit);
        rotate_pair(amps[i0], amps[i0 | bit], m);
    }
}

void apply_cnot(std::span<Complex> amps, std::size_t control, std::size_t target) {
    const std::size_t cbit = std::size_t{1} << control;
    const std::size_t tbit = std::size_t{1} << target;
    for (std::size_t i = 0; i < amps.size(); ++i) {
        if ((i & cbit) && !(i & tbit))
            std::swap(amps[i], amps[i | tbit]);
    }
}

void z_expectations(std::span<const Complex> amps, std::span<double> out) {
    const std::size_t n = qubit_count(amps.size());
    std::fill(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(n), 0.0);
    for (std::size_t k = 0; k < amps.size(); ++k) {
        const double p = std::norm(amps[k]);
        for (std::size_t q = 0; q < n; ++q)
            out[q] += ((k >> q) & 1U) ? -p : p;
    }
}

} // namespace serial

namespace parallel {

void apply_1q(std::span<Complex> amps, std::size_t qubit, const Matrix2 &m) {
    const auto half = static_cast<std::int64_t>(amps.size() / 2);
    const std::size_t bit = std::size_t{1} << qubit;
    Complex *data = amps.data();
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < half; ++i) {
        const std::size_t i0 = pair_base(static_cast<std::size_t>(i), qubit);
        rotate_pair(data[i0], data[i0 | bit], m);
    }
}

void apply_cnot(std::span<Complex> amps, std::size_t control, std::size_t target) {
    // Enumerate the dim/4 indices with both bits clear, then set the control.
    const std::size_t lo = std::min(control, target), hi = std::max(control, target);
    const std::size_t cbit = std::size_t{1} << control;
    const std::size_t tbit = std::size_t{1} << target;
    const auto quarter = static_cast<std::int64_t>(amps.size() / 4);
    Complex *data = amps.data();
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < quarter; ++i) {
        const std::size_t base = pair_base(pair_base(static_cast<std::size_t>(i), lo), hi);
        const std::size_t i0 = base | cbit;
        std::swap(data[i0], data[i0 | tbit]);
    }
}

void z_expectations(std::span<const Complex> amps, std::span<double> out) {
    const std::size_t n = qubit_count(amps.size());
    constexpr std::size_t kChunks = 64;
    const std::size_t chunk = std::max<std::size_t>(1, amps.size() / kChunks);
    const std::size_t n_chunks = (amps.size() + chunk - 1) / chunk;
    std::vector<double> partial(n_chunks * n, 0.0);
    const Complex *data = amps.data();
#pragma omp parallel for schedule(static)
    for (std::int64_t c = 0; c < static_cast<std::int64_t>(n_chunks); ++c) {
        double *acc = partial.data() + static_cast<std::size_t>(c) * n;
        const std::size_t begin = static_cast<std::size_t>(c) * chunk;
        const std::size_t end = std::min(begin + chunk, amps.size());
        for (std::size_t k = begin; k < end; ++k) {
            const double p = std::norm(data[k]);
            for (std::size_t q = 0; q < n; ++q)
                acc[q] += ((k >> q) & 1U) ? -p : p;
        }
    }
    std::fill(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(n), 0.0);
    for (std::size_t c = 0; c < n_chunks; ++c)
        for (std::size_t q = 0; q < n; ++q)
            out[q] += partial[c * n + q];
}

} // namespace parallel

} // namespace qmarket::quantum::kernels
