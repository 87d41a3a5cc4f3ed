#include "qmarket/quantum/statevector.hpp"

#include <bit>
#include <cmath>
#include <string>

#include "qmarket/error.hpp"
#include "qmarket/quantum/kernels.hpp"

namespace qmarket::quantum {

namespace {

void check_qubit(const StateVector &s, std::size_t q) {
    if (q >= s.n_qubits())
        throw InputError("qubit index " + std::to_string(q) + " out of range for " +
                         std::to_string(s.n_qubits()) + " qubits");
}

bool use_parallel(const StateVector &s) { return s.dim() >= kernels::kParallelMinDim; }

} // namespace

StateVector::StateVector(std::size_t n_qubits) : n_qubits_(n_qubits) {
    if (n_qubits < 1 || n_qubits > kMaxQubits)
        throw InputError("qubit count must be in [1, " + std::to_string(kMaxQubits) + "]");
    amps_.assign(std::size_t{1} << n_qubits, Complex{0.0, 0.0});
    amps_[0] = 1.0;
}

StateVector StateVector::from_amplitudes(std::vector<Complex> amplitudes) {
    const std::size_t dim = amplitudes.size();
    if (dim < 2 || !std::has_single_bit(dim) ||
        static_cast<std::size_t>(std::countr_zero(dim)) > kMaxQubits)
        throw InputError("amplitude count must be 2^n with 1 <= n <= 12");
    StateVector s;
    s.n_qubits_ = static_cast<std::size_t>(std::countr_zero(dim));
    s.amps_ = std::move(amplitudes);
    if (std::abs(s.norm_squared() - 1.0) > 1e-10)
        throw InputError("amplitudes are not normalized");
    return s;
}

double StateVector::norm_squared() const {
    double sum = 0.0;
    for (const auto &a : amps_)
        sum += std::norm(a);
    return sum;
}

Matrix2 rotation_matrix(Axis axis, double angle) {
    const double c = std::cos(angle / 2.0);
    const double s = std::sin(angle / 2.0);
    switch (axis) {
    case Axis::x:
        return {Complex{c, 0}, Complex{0, -s}, Complex{0, -s}, Complex{c, 0}};
    case Axis::y:
        return {Complex{c, 0}, Complex{-s, 0}, Complex{s, 0}, Complex{c, 0}};
    case Axis::z:
        return {Complex{c, -s}, Complex{0, 0}, Complex{0, 0}, Complex{c, s}};
    }
    return {};
}

StateVector zero_state(std::size_t n_qubits) { return StateVector(n_qubits); }

StateVector apply_gate(StateVector state, const Matrix2 &gate, std::size_t qubit) {
    check_qubit(state, qubit);
    if (use_parallel(state))
        kernels::parallel::apply_1q(state.amplitudes_mut(), qubit, gate);
    else
        kernels::serial::apply_1q(state.amplitudes_mut(), qubit, gate);
    return state;
}

StateVector apply_rotation(StateVector state, Axis axis, std::size_t qubit, double angle) {
    return apply_gate(std::move(state), rotation_matrix(axis, angle), qubit);
}

StateVector apply_cnot(StateVector state, std::size_t control, std::size_t target) {
    check_qubit(state, control);
    check_qubit(state, target);
    if (control == target)
        throw InputError("CNOT control and target must differ");
    if (use_parallel(state))
        kernels::parallel::apply_cnot(state.amplitudes_mut(), control, target);
    else
        kernels::serial::apply_cnot(state.amplitudes_mut(), control, target);
    return state;
}

StateVector apply_entangler(StateVector state) {
    if (state.n_qubits() < 2)
        throw InputError("entangler needs at least 2 qubits");
    for (std::size_t q = 0; q + 1 < state.n_qubits(); ++q)
        state = apply_cnot(std::move(state), q, q + 1);
    return state;
}

std::vector<double> z_expectations(const StateVector &state) {
    std::vector<double> out(state.n_qubits(), 0.0);
    if (use_parallel(state))
        kernels::parallel::z_expectations(state.amplitudes(), out);
    else
        kernels::serial::z_expectations(state.amplitudes(), out);
    return out;
}

double expectation_weighted_z(const StateVector &state, std::span<const double> weights) {
    if (weights.size() != state.n_qubits())
        throw InputError("observable has " + std::to_string(weights.size()) +
                         " weights for " + std::to_string(state.n_qubits()) + " qubits");
    const auto z = z_expectations(state);
    double total = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i)
        total += weights[i] * z[i];
    return total;
}

} // namespace qmarket::quantum
