#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace qmarket::quantum {

using Complex = std::complex<double>;

/// Row-major 2x2 gate matrix {m00, m01, m10, m11}.
using Matrix2 = std::array<Complex, 4>;

inline constexpr std::size_t kMaxQubits = 12;

/// Dense register of 2^n amplitudes.
///
/// Qubit 0 is the least-significant bit of the basis index: amplitude k
/// belongs to the basis state whose qubit i equals bit i of k. Ket labels in
/// tests and docs list qubit 0 first, so |10> is index 1.
class StateVector {
  public:
    /// |0...0> on n qubits. Throws InputError unless 1 <= n <= kMaxQubits.
    explicit StateVector(std::size_t n_qubits);

    /// Adopts explicit amplitudes. Length must be a power of two within the
    /// qubit limit and the vector must be normalized to 1e-10.
    static StateVector from_amplitudes(std::vector<Complex> amplitudes);

    std::size_t n_qubits() const { return n_qubits_; }
    std::size_t dim() const { return amps_.size(); }
    std::span<const Complex> amplitudes() const { return amps_; }
    std::span<Complex> amplitudes_mut() { return amps_; }
    const Complex &operator[](std::size_t i) const { return amps_[i]; }

    double norm_squared() const;

  private:
    StateVector() = default;
    std::size_t n_qubits_ = 0;
    std::vector<Complex> amps_;
};

enum class Axis { x, y, z };

Matrix2 rotation_matrix(Axis axis, double angle);

StateVector zero_state(std::size_t n_qubits);

// The gate operations take the state by value and return it: callers that
// move their state in get an in-place update, callers that pass an lvalue
// keep their copy untouched.

StateVector apply_rotation(StateVector state, Axis axis, std::size_t qubit, double angle);
StateVector apply_gate(StateVector state, const Matrix2 &gate, std::size_t qubit);
StateVector apply_cnot(StateVector state, std::size_t control, std::size_t target);

/// CNOT(0,1), CNOT(1,2), ..., CNOT(n-2, n-1) in that order.
StateVector apply_entangler(StateVector state);

/// <sigma_z^(i)> for every qubit i.
std::vector<double> z_expectations(const StateVector &state);

/// sum_i w_i <sigma_z^(i)>.
double expectation_weighted_z(const StateVector &state, std::span<const double> weights);

} // namespace qmarket::quantum
