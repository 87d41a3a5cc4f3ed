#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <json.hpp>

#include "qmarket/quantum/statevector.hpp"
#include "qmarket/rng.hpp"

namespace qmarket::qfunc {

struct FeatureRange {
    double min = 0.0;
    double max = 1.0;
    bool operator==(const FeatureRange &) const = default;
};

struct VqcConfig {
    std::size_t n_qubits = 6;
    std::size_t n_layers = 2;
    std::size_t n_actions = 11;
    std::vector<FeatureRange> feature_ranges = std::vector<FeatureRange>(6);
    /// One angle drives both the Ry and the Rz of a qubit in a layer.
    bool tie_ry_rz = true;

    std::size_t angles_per_layer() const { return tie_ry_rz ? n_qubits : 2 * n_qubits; }
    std::size_t n_angles() const { return n_layers * angles_per_layer(); }
    std::size_t n_weights() const { return n_actions * n_qubits; }

    bool operator==(const VqcConfig &) const = default;
};

/// Throws InputError when the config is internally inconsistent.
void validate(const VqcConfig &config);

/// Trainable circuit parameters.
///
/// `angles` is layer-major: tied mode stores angles[l * n + i]; untied mode
/// stores the Ry angle at [(l * n + i) * 2] and the Rz angle right after it.
/// `weights` is action-major: weights[a * n + i] scales sigma_z on qubit i
/// in the observable of action a.
struct VqcParams {
    std::vector<double> angles;
    std::vector<double> weights;

    bool operator==(const VqcParams &) const = default;
};

/// Same shape as the parameters.
using VqcGradient = VqcParams;

/// Per-qubit Rx encoding angles in [0, pi].
struct EncodedState {
    std::vector<double> angles;
};

EncodedState encode(std::span<const double> features, const VqcConfig &config);

/// Angles uniform in [0, 2pi), observable weights uniform in [-1, 1].
VqcParams init_params(const VqcConfig &config, RngStream &rng);

/// Runs encoding and all variational layers from |0...0>.
quantum::StateVector prepare_state(const EncodedState &encoded, const VqcParams &params,
                                   const VqcConfig &config);

/// Q-value of every action: the weighted sigma_z observable of that action.
std::vector<double> forward(const EncodedState &encoded, const VqcParams &params,
                            const VqcConfig &config);

/// Gradient of 0.5 * residual^2, with residual = y - Q_action, treating the
/// target y as constant. Angle derivatives use the parameter-shift rule,
/// evaluated gate by gate; the shifted circuits run in parallel.
VqcGradient grad(const EncodedState &encoded, const VqcParams &params,
                 const VqcConfig &config, std::size_t action, double residual);

/// Single-threaded reference for grad(); identical results.
VqcGradient grad_serial(const EncodedState &encoded, const VqcParams &params,
                        const VqcConfig &config, std::size_t action, double residual);

VqcParams apply_update(VqcParams params, const VqcGradient &gradient, double learning_rate);

nlohmann::json checkpoint(const VqcParams &params, const VqcConfig &config);
/// Loads a checkpoint written for `config`; rejects shape or config mismatch.
VqcParams load_checkpoint(const nlohmann::json &doc, const VqcConfig &config);

} // namespace qmarket::qfunc
