#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <json.hpp>

#include "qmarket/rng.hpp"

namespace qmarket::qfunc {

/// Feed-forward network: inputs -> tanh hidden layers -> linear outputs.
struct MlpConfig {
    std::size_t n_inputs = 6;
    std::vector<std::size_t> hidden = {64, 64};
    std::size_t n_actions = 11;

    bool operator==(const MlpConfig &) const = default;
};

void validate(const MlpConfig &config);

struct DenseLayer {
    std::size_t n_in = 0;
    std::size_t n_out = 0;
    std::vector<double> weights;  // n_out x n_in, row-major
    std::vector<double> bias;     // n_out

    bool operator==(const DenseLayer &) const = default;
};

struct MlpParams {
    std::vector<DenseLayer> layers;

    bool operator==(const MlpParams &) const = default;
};

using MlpGradient = MlpParams;

/// Uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)] for weights and biases.
MlpParams init_params(const MlpConfig &config, RngStream &rng);

/// All-zero parameters with the architecture of `config`.
MlpParams zero_params(const MlpConfig &config);

std::vector<double> forward(std::span<const double> features, const MlpParams &params);

/// Reverse pass for an arbitrary upstream gradient dL/d(output).
MlpGradient backprop(std::span<const double> features, const MlpParams &params,
                     std::span<const double> output_delta);

/// Backpropagates -residual through output `action` only: the gradient of
/// 0.5 * (y - Q_action)^2 with y held fixed.
MlpGradient grad(std::span<const double> features, const MlpParams &params,
                 std::size_t action, double residual);

MlpParams apply_update(MlpParams params, const MlpGradient &gradient, double learning_rate);

nlohmann::json checkpoint(const MlpParams &params, const MlpConfig &config);
MlpParams load_checkpoint(const nlohmann::json &doc, const MlpConfig &config);

} // namespace qmarket::qfunc
