#include "qmarket/qfunc/qfunction.hpp"

#include <algorithm>

#include "qmarket/error.hpp"

namespace qmarket::qfunc {

namespace {

void check_size(std::span<const double> flat, std::size_t expected) {
    if (flat.size() != expected)
        throw InputError("flat parameter vector has " + std::to_string(flat.size()) +
                         " entries, expected " + std::to_string(expected));
}

// Angles first, then observable weights.
std::vector<double> flatten(const VqcParams &p) {
    std::vector<double> out(p.angles);
    out.insert(out.end(), p.weights.begin(), p.weights.end());
    return out;
}

// Layer by layer: weights then bias.
std::vector<double> flatten(const MlpParams &p) {
    std::vector<double> out;
    for (const auto &l : p.layers) {
        out.insert(out.end(), l.weights.begin(), l.weights.end());
        out.insert(out.end(), l.bias.begin(), l.bias.end());
    }
    return out;
}

} // namespace

VqcQFunction::VqcQFunction(VqcConfig config, VqcParams params)
    : config_(std::move(config)), params_(std::move(params)) {
    validate(config_);
    if (params_.angles.size() != config_.n_angles() ||
        params_.weights.size() != config_.n_weights())
        throw InputError("VQC parameter shape does not match config");
}

std::size_t VqcQFunction::n_parameters() const {
    return config_.n_angles() + config_.n_weights();
}

std::vector<double> VqcQFunction::q_values(std::span<const double> features) const {
    return forward(encode(features, config_), params_, config_);
}

std::vector<double> VqcQFunction::gradient(std::span<const double> features,
                                           std::size_t action, double residual) const {
    return flatten(grad(encode(features, config_), params_, config_, action, residual));
}

void VqcQFunction::apply_update(std::span<const double> gradient, double learning_rate) {
    check_size(gradient, n_parameters());
    const std::size_t na = params_.angles.size();
    for (std::size_t i = 0; i < na; ++i)
        params_.angles[i] -= learning_rate * gradient[i];
    for (std::size_t i = 0; i < params_.weights.size(); ++i)
        params_.weights[i] -= learning_rate * gradient[na + i];
}

std::vector<double> VqcQFunction::parameters() const { return flatten(params_); }

void VqcQFunction::set_parameters(std::span<const double> flat) {
    check_size(flat, n_parameters());
    const std::size_t na = params_.angles.size();
    std::copy(flat.begin(), flat.begin() + static_cast<std::ptrdiff_t>(na), params_.angles.begin());
    std::copy(flat.begin() + static_cast<std::ptrdiff_t>(na), flat.end(), params_.weights.begin());
}

std::unique_ptr<QFunction> VqcQFunction::clone() const {
    return std::make_unique<VqcQFunction>(*this);
}

nlohmann::json VqcQFunction::checkpoint() const { return qfunc::checkpoint(params_, config_); }

MlpQFunction::MlpQFunction(MlpConfig config, MlpParams params)
    : config_(std::move(config)), params_(std::move(params)) {
    validate(config_);
    const auto expected = zero_params(config_);
    bool ok = expected.layers.size() == params_.layers.size();
    for (std::size_t l = 0; ok && l < expected.layers.size(); ++l) {
        const auto &e = expected.layers[l];
        const auto &p = params_.layers[l];
        ok = e.n_in == p.n_in && e.n_out == p.n_out && e.weights.size() == p.weights.size() &&
             e.bias.size() == p.bias.size();
    }
    if (!ok)
        throw InputError("MLP parameter shape does not match config");
}

std::size_t MlpQFunction::n_parameters() const {
    std::size_t n = 0;
    for (const auto &l : params_.layers)
        n += l.weights.size() + l.bias.size();
    return n;
}

std::vector<double> MlpQFunction::q_values(std::span<const double> features) const {
    return forward(features, params_);
}

std::vector<double> MlpQFunction::gradient(std::span<const double> features,
                                           std::size_t action, double residual) const {
    return flatten(grad(features, params_, action, residual));
}

void MlpQFunction::apply_update(std::span<const double> gradient, double learning_rate) {
    check_size(gradient, n_parameters());
    std::size_t k = 0;
    for (auto &l : params_.layers) {
        for (auto &w : l.weights)
            w -= learning_rate * gradient[k++];
        for (auto &b : l.bias)
            b -= learning_rate * gradient[k++];
    }
}

std::vector<double> MlpQFunction::parameters() const { return flatten(params_); }

void MlpQFunction::set_parameters(std::span<const double> flat) {
    check_size(flat, n_parameters());
    std::size_t k = 0;
    for (auto &l : params_.layers) {
        for (auto &w : l.weights)
            w = flat[k++];
        for (auto &b : l.bias)
            b = flat[k++];
    }
}

std::unique_ptr<QFunction> MlpQFunction::clone() const {
    return std::make_unique<MlpQFunction>(*this);
}

nlohmann::json MlpQFunction::checkpoint() const { return qfunc::checkpoint(params_, config_); }

} // namespace qmarket::qfunc
