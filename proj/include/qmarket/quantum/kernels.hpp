#pragma once

#include <cstddef>
#include <span>

#include "qmarket/quantum/statevector.hpp"

// Raw amplitude kernels. `serial` is the reference implementation that the
// tests compare against; `parallel` splits the same loops across OpenMP
// threads. Neither validates arguments: callers own bounds checks.
//
// Kernels take any power-of-two span, so the benchmark can drive them past
// the StateVector qubit limit.

namespace qmarket::quantum::kernels {

/// Registers at or above this dimension use the parallel kernels.
inline constexpr std::size_t kParallelMinDim = std::size_t{1} << 10;

namespace serial {
void apply_1q(std::span<Complex> amps, std::size_t qubit, const Matrix2 &m);
void apply_cnot(std::span<Complex> amps, std::size_t control, std::size_t target);
void z_expectations(std::span<const Complex> amps, std::span<double> out);
} // namespace serial

namespace parallel {
void apply_1q(std::span<Complex> amps, std::size_t qubit, const Matrix2 &m);
void apply_cnot(std::span<Complex> amps, std::size_t control, std::size_t target);
/// Reduction runs over a fixed chunk partition and is summed in chunk order,
/// so the result does not depend on the thread count.
void z_expectations(std::span<const Complex> amps, std::span<double> out);
} // namespace parallel

} // namespace qmarket::quantum::kernels
