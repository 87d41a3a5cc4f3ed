#include "qmarket/qfunc/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qmarket/error.hpp"

namespace qmarket::qfunc {

namespace {

std::vector<std::size_t> widths(const MlpConfig &c) {
    std::vector<std::size_t> w{c.n_inputs};
    w.insert(w.end(), c.hidden.begin(), c.hidden.end());
    w.push_back(c.n_actions);
    return w;
}

void affine(const DenseLayer &layer, std::span<const double> x, std::vector<double> &out) {
    out.assign(layer.bias.begin(), layer.bias.end());
    for (std::size_t o = 0; o < layer.n_out; ++o) {
        const double *row = layer.weights.data() + o * layer.n_in;
        double acc = 0.0;
        for (std::size_t i = 0; i < layer.n_in; ++i)
            acc += row[i] * x[i];
        out[o] += acc;
    }
}

void check_input(std::span<const double> x, const MlpParams &p) {
    if (p.layers.empty())
        throw InputError("mlp has no layers");
    if (x.size() != p.layers.front().n_in)
        throw InputError("mlp expects " + std::to_string(p.layers.front().n_in) +
                         " features, got " + std::to_string(x.size()));
}

} // namespace

void validate(const MlpConfig &config) {
    if (config.n_inputs == 0)
        throw InputError("mlp: n_inputs must be >= 1");
    if (config.n_actions < 2)
        throw InputError("mlp: n_actions must be >= 2");
    for (auto h : config.hidden)
        if (h == 0)
            throw InputError("mlp: hidden widths must be >= 1");
}

MlpParams zero_params(const MlpConfig &config) {
    const auto w = widths(config);
    MlpParams p;
    for (std::size_t l = 0; l + 1 < w.size(); ++l) {
        DenseLayer layer;
        layer.n_in = w[l];
        layer.n_out = w[l + 1];
        layer.weights.assign(layer.n_in * layer.n_out, 0.0);
        layer.bias.assign(layer.n_out, 0.0);
        p.layers.push_back(std::move(layer));
    }
    return p;
}

MlpParams init_params(const MlpConfig &config, RngStream &rng) {
    auto p = zero_params(config);
    for (auto &layer : p.layers) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(layer.n_in));
        for (auto &w : layer.weights)
            w = bound * (2.0 * rng.uniform() - 1.0);
        for (auto &b : layer.bias)
            b = bound * (2.0 * rng.uniform() - 1.0);
    }
    return p;
}

std::vector<double> forward(std::span<const double> features, const MlpParams &params) {
    check_input(features, params);
    std::vector<double> x(features.begin(), features.end()), y;
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        affine(params.layers[l], x, y);
        if (l + 1 < params.layers.size())
            for (auto &v : y)
                v = std::tanh(v);
        x.swap(y);
    }
    return x;
}

MlpGradient backprop(std::span<const double> features, const MlpParams &params,
                     std::span<const double> output_delta) {
    check_input(features, params);
    const std::size_t n_layers = params.layers.size();
    if (output_delta.size() != params.layers.back().n_out)
        throw InputError("output gradient has the wrong length");

    MlpGradient g;
    g.layers.reserve(n_layers);
    for (const auto &layer : params.layers) {
        DenseLayer z{layer.n_in, layer.n_out, std::vector<double>(layer.weights.size(), 0.0),
                     std::vector<double>(layer.bias.size(), 0.0)};
        g.layers.push_back(std::move(z));
    }
    if (std::all_of(output_delta.begin(), output_delta.end(), [](double d) { return d == 0.0; }))
        return g;

    // activations[l] is the input to layer l.
    std::vector<std::vector<double>> activations(n_layers + 1);
    activations[0].assign(features.begin(), features.end());
    for (std::size_t l = 0; l < n_layers; ++l) {
        affine(params.layers[l], activations[l], activations[l + 1]);
        if (l + 1 < n_layers)
            for (auto &v : activations[l + 1])
                v = std::tanh(v);
    }

    std::vector<double> delta(output_delta.begin(), output_delta.end());
    for (std::size_t l = n_layers; l-- > 0;) {
        const auto &layer = params.layers[l];
        auto &gl = g.layers[l];
        const auto &input = activations[l];
        for (std::size_t o = 0; o < layer.n_out; ++o) {
            if (delta[o] == 0.0)
                continue;
            gl.bias[o] = delta[o];
            double *row = gl.weights.data() + o * layer.n_in;
            for (std::size_t i = 0; i < layer.n_in; ++i)
                row[i] = delta[o] * input[i];
        }
        if (l == 0)
            break;
        std::vector<double> prev(layer.n_in, 0.0);
        for (std::size_t o = 0; o < layer.n_out; ++o) {
            if (delta[o] == 0.0)
                continue;
            const double *row = layer.weights.data() + o * layer.n_in;
            for (std::size_t i = 0; i < layer.n_in; ++i)
                prev[i] += row[i] * delta[o];
        }
        for (std::size_t i = 0; i < layer.n_in; ++i)
            prev[i] *= 1.0 - input[i] * input[i];  // tanh'
        delta.swap(prev);
    }
    return g;
}

MlpGradient grad(std::span<const double> features, const MlpParams &params,
                 std::size_t action, double residual) {
    check_input(features, params);
    if (action >= params.layers.back().n_out)
        throw InputError("action index out of range");
    // dL/dQ is -residual on the taken action, zero elsewhere.
    std::vector<double> delta(params.layers.back().n_out, 0.0);
    delta[action] = -residual;
    return backprop(features, params, delta);
}

MlpParams apply_update(MlpParams params, const MlpGradient &gradient, double learning_rate) {
    if (gradient.layers.size() != params.layers.size())
        throw InputError("gradient shape does not match parameters");
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        auto &p = params.layers[l];
        const auto &g = gradient.layers[l];
        if (g.weights.size() != p.weights.size() || g.bias.size() != p.bias.size())
            throw InputError("gradient shape does not match parameters");
        for (std::size_t i = 0; i < p.weights.size(); ++i)
            p.weights[i] -= learning_rate * g.weights[i];
        for (std::size_t i = 0; i < p.bias.size(); ++i)
            p.bias[i] -= learning_rate * g.bias[i];
    }
    return params;
}

nlohmann::json checkpoint(const MlpParams &params, const MlpConfig &config) {
    nlohmann::json layers = nlohmann::json::array();
    for (const auto &l : params.layers)
        layers.push_back({{"n_in", l.n_in}, {"n_out", l.n_out}, {"weights", l.weights},
                          {"bias", l.bias}});
    return {{"kind", "mlp"},
            {"config",
             {{"n_inputs", config.n_inputs},
              {"hidden", config.hidden},
              {"n_actions", config.n_actions}}},
            {"layers", layers}};
}

MlpParams load_checkpoint(const nlohmann::json &doc, const MlpConfig &config) {
    try {
        if (doc.at("kind").get<std::string>() != "mlp")
            throw InputError("checkpoint is not an MLP checkpoint");
        const auto &c = doc.at("config");
        if (c.at("n_inputs").get<std::size_t>() != config.n_inputs ||
            c.at("hidden").get<std::vector<std::size_t>>() != config.hidden ||
            c.at("n_actions").get<std::size_t>() != config.n_actions)
            throw InputError("checkpoint config does not match the active MLP config");
        auto p = zero_params(config);
        const auto &layers = doc.at("layers");
        if (layers.size() != p.layers.size())
            throw InputError("checkpoint layer count does not match config");
        for (std::size_t l = 0; l < p.layers.size(); ++l) {
            auto w = layers[l].at("weights").get<std::vector<double>>();
            auto b = layers[l].at("bias").get<std::vector<double>>();
            if (w.size() != p.layers[l].weights.size() || b.size() != p.layers[l].bias.size())
                throw InputError("checkpoint layer shape does not match config");
            p.layers[l].weights = std::move(w);
            p.layers[l].bias = std::move(b);
        }
        return p;
    } catch (const nlohmann::json::exception &e) {
        throw InputError(std::string("malformed MLP checkpoint: ") + e.what());
    }
}

} // namespace qmarket::qfunc
