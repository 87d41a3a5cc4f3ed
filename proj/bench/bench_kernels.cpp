// Serial reference vs OpenMP kernels, and the parameter-shift gradient.

#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "qmarket/quantum/kernels.hpp"
#include "qmarket/quantum/statevector.hpp"
#include "qmarket/qfunc/vqc.hpp"
#include "qmarket/rng.hpp"

using namespace qmarket;
using namespace qmarket::quantum;

namespace {

std::vector<Complex> random_amps(std::size_t n) {
    RngStream rng(1);
    std::vector<Complex> a(std::size_t{1} << n);
    double norm = 0.0;
    for (auto &x : a) {
        x = {rng.normal(0, 1), rng.normal(0, 1)};
        norm += std::norm(x);
    }
    for (auto &x : a)
        x /= std::sqrt(norm);
    return a;
}

template <auto Kernel> void bm_1q(benchmark::State &state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    auto amps = random_amps(n);
    const auto m = rotation_matrix(Axis::y, 0.3);
    for (auto _ : state) {
        for (std::size_t q = 0; q < n; ++q)
            Kernel(amps, q, m);
        benchmark::DoNotOptimize(amps.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}

template <auto Kernel> void bm_cnot(benchmark::State &state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    auto amps = random_amps(n);
    for (auto _ : state) {
        for (std::size_t q = 0; q + 1 < n; ++q)
            Kernel(amps, q, q + 1);
        benchmark::DoNotOptimize(amps.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n - 1));
}

template <auto Kernel> void bm_z(benchmark::State &state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto amps = random_amps(n);
    std::vector<double> out(n);
    for (auto _ : state) {
        Kernel(amps, out);
        benchmark::DoNotOptimize(out.data());
    }
}

template <bool Serial> void bm_grad(benchmark::State &state) {
    qfunc::VqcConfig c;
    c.n_layers = static_cast<std::size_t>(state.range(0));
    RngStream rng(2);
    const auto p = qfunc::init_params(c, rng);
    const std::vector<double> f{0.1, 0.5, 0.9, 0.3, 0.7, 0.2};
    const auto enc = qfunc::encode(f, c);
    for (auto _ : state) {
        auto g = Serial ? qfunc::grad_serial(enc, p, c, 3, 0.5) : qfunc::grad(enc, p, c, 3, 0.5);
        benchmark::DoNotOptimize(g.angles.data());
    }
}

} // namespace

BENCHMARK(bm_1q<kernels::serial::apply_1q>)->Name("apply_1q/serial")->DenseRange(6, 20, 2);
BENCHMARK(bm_1q<kernels::parallel::apply_1q>)->Name("apply_1q/parallel")->DenseRange(6, 20, 2);
BENCHMARK(bm_cnot<kernels::serial::apply_cnot>)->Name("apply_cnot/serial")->DenseRange(6, 20, 2);
BENCHMARK(bm_cnot<kernels::parallel::apply_cnot>)
    ->Name("apply_cnot/parallel")
    ->DenseRange(6, 20, 2);
BENCHMARK(bm_z<kernels::serial::z_expectations>)->Name("z_expect/serial")->DenseRange(6, 20, 2);
BENCHMARK(bm_z<kernels::parallel::z_expectations>)
    ->Name("z_expect/parallel")
    ->DenseRange(6, 20, 2);
BENCHMARK(bm_grad<true>)->Name("vqc_grad/serial")->DenseRange(1, 3);
BENCHMARK(bm_grad<false>)->Name("vqc_grad/parallel")->DenseRange(1, 3);

BENCHMARK_MAIN();
