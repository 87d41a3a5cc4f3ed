#include "qmarket/qfunc/vqc.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>

#include "qmarket/error.hpp"

namespace qmarket::qfunc {

using quantum::Axis;
using quantum::StateVector;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kShift = kPi / 2.0;

// One gate of the compiled circuit. `param` indexes VqcParams::angles, or is
// -1 for the fixed encoding rotations.
struct Op {
    enum class Kind { rotation, cnot } kind;
    Axis axis = Axis::x;
    std::size_t qubit = 0;
    std::size_t target = 0;
    double angle = 0.0;
    std::ptrdiff_t param = -1;
};

std::vector<Op> compile(const EncodedState &encoded, const VqcParams &params,
                        const VqcConfig &config) {
    const std::size_t n = config.n_qubits;
    std::vector<Op> ops;
    ops.reserve(n + config.n_layers * (3 * n));
    for (std::size_t i = 0; i < n; ++i)
        ops.push_back({Op::Kind::rotation, Axis::x, i, 0, encoded.angles[i], -1});
    for (std::size_t l = 0; l < config.n_layers; ++l) {
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t slot = l * n + i;
            const std::size_t y_idx = config.tie_ry_rz ? slot : 2 * slot;
            const std::size_t z_idx = config.tie_ry_rz ? slot : 2 * slot + 1;
            ops.push_back({Op::Kind::rotation, Axis::y, i, 0, params.angles[y_idx],
                           static_cast<std::ptrdiff_t>(y_idx)});
            ops.push_back({Op::Kind::rotation, Axis::z, i, 0, params.angles[z_idx],
                           static_cast<std::ptrdiff_t>(z_idx)});
        }
        for (std::size_t i = 0; i + 1 < n; ++i)
            ops.push_back({Op::Kind::cnot, Axis::x, i, i + 1, 0.0, -1});
    }
    return ops;
}

StateVector run(StateVector state, const Op &op, double angle) {
    if (op.kind == Op::Kind::cnot)
        return quantum::apply_cnot(std::move(state), op.qubit, op.target);
    return quantum::apply_rotation(std::move(state), op.axis, op.qubit, angle);
}

void check_shapes(const EncodedState &encoded, const VqcParams &params,
                  const VqcConfig &config) {
    if (encoded.angles.size() != config.n_qubits)
        throw InputError("encoded state has " + std::to_string(encoded.angles.size()) +
                         " angles, expected " + std::to_string(config.n_qubits));
    if (params.angles.size() != config.n_angles() ||
        params.weights.size() != config.n_weights())
        throw InputError("VQC parameter shape does not match config");
}

double observable(std::span<const double> z, const VqcParams &params, std::size_t action,
                  std::size_t n) {
    double q = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        q += params.weights[action * n + i] * z[i];
    return q;
}

// Shared body of grad() and grad_serial(). Each parametric gate occurrence k
// is shifted by +-pi/2 starting from the cached state just before it; the
// per-occurrence derivative lands in slot k and is summed into the angle
// gradient afterwards in circuit order, so both paths agree bit for bit.
VqcGradient grad_impl(const EncodedState &encoded, const VqcParams &params,
                      const VqcConfig &config, std::size_t action, double residual,
                      bool parallel) {
    check_shapes(encoded, params, config);
    if (action >= config.n_actions)
        throw InputError("action index out of range");
    const std::size_t n = config.n_qubits;

    VqcGradient g;
    g.angles.assign(params.angles.size(), 0.0);
    g.weights.assign(params.weights.size(), 0.0);
    if (residual == 0.0)
        return g;

    const auto ops = compile(encoded, params, config);
    std::vector<StateVector> before;
    before.reserve(ops.size() + 1);
    before.emplace_back(n);
    for (const auto &op : ops)
        before.push_back(run(before.back(), op, op.angle));

    const auto z_final = quantum::z_expectations(before.back());
    for (std::size_t i = 0; i < n; ++i)
        g.weights[action * n + i] = -residual * z_final[i];

    std::vector<std::size_t> shifted;
    for (std::size_t k = 0; k < ops.size(); ++k)
        if (ops[k].param >= 0)
            shifted.push_back(k);

    std::vector<double> dq(shifted.size(), 0.0);
    const auto count = static_cast<std::int64_t>(shifted.size());
#pragma omp parallel for schedule(dynamic) if (parallel)
    for (std::int64_t s = 0; s < count; ++s) {
        const std::size_t k = shifted[static_cast<std::size_t>(s)];
        double q_pm[2];
        for (int sign = 0; sign < 2; ++sign) {
            const double delta = sign == 0 ? kShift : -kShift;
            StateVector state = run(before[k], ops[k], ops[k].angle + delta);
            for (std::size_t j = k + 1; j < ops.size(); ++j)
                state = run(std::move(state), ops[j], ops[j].angle);
            q_pm[sign] = observable(quantum::z_expectations(state), params, action, n);
        }
        dq[static_cast<std::size_t>(s)] = 0.5 * (q_pm[0] - q_pm[1]);
    }
    for (std::size_t s = 0; s < shifted.size(); ++s)
        g.angles[static_cast<std::size_t>(ops[shifted[s]].param)] += -residual * dq[s];
    return g;
}

} // namespace

void validate(const VqcConfig &config) {
    if (config.n_qubits < 2 || config.n_qubits > quantum::kMaxQubits)
        throw InputError("vqc: n_qubits must be in [2, 12]");
    if (config.n_actions < 2)
        throw InputError("vqc: n_actions must be >= 2");
    if (config.feature_ranges.size() != config.n_qubits)
        throw InputError("vqc: need one feature range per qubit");
    for (const auto &r : config.feature_ranges)
        if (!(r.min < r.max) || !std::isfinite(r.min) || !std::isfinite(r.max))
            throw InputError("vqc: feature range requires finite min < max");
}

EncodedState encode(std::span<const double> features, const VqcConfig &config) {
    if (features.size() != config.n_qubits)
        throw InputError("encode: expected " + std::to_string(config.n_qubits) +
                         " features, got " + std::to_string(features.size()));
    EncodedState out;
    out.angles.resize(features.size());
    for (std::size_t i = 0; i < features.size(); ++i) {
        if (!std::isfinite(features[i]))
            throw InputError("encode: feature " + std::to_string(i) + " is not finite");
        const auto &r = config.feature_ranges[i];
        const double t = (features[i] - r.min) / (r.max - r.min);
        out.angles[i] = kPi * std::clamp(t, 0.0, 1.0);
    }
    return out;
}

VqcParams init_params(const VqcConfig &config, RngStream &rng) {
    VqcParams p;
    p.angles.resize(config.n_angles());
    p.weights.resize(config.n_weights());
    for (auto &a : p.angles)
        a = 2.0 * kPi * rng.uniform();
    for (auto &w : p.weights)
        w = 2.0 * rng.uniform() - 1.0;
    return p;
}

StateVector prepare_state(const EncodedState &encoded, const VqcParams &params,
                          const VqcConfig &config) {
    check_shapes(encoded, params, config);
    StateVector state(config.n_qubits);
    for (const auto &op : compile(encoded, params, config))
        state = run(std::move(state), op, op.angle);
    return state;
}

std::vector<double> forward(const EncodedState &encoded, const VqcParams &params,
                            const VqcConfig &config) {
    const auto z = quantum::z_expectations(prepare_state(encoded, params, config));
    std::vector<double> q(config.n_actions);
    for (std::size_t a = 0; a < config.n_actions; ++a)
        q[a] = observable(z, params, a, config.n_qubits);
    return q;
}

VqcGradient grad(const EncodedState &encoded, const VqcParams &params,
                 const VqcConfig &config, std::size_t action, double residual) {
    return grad_impl(encoded, params, config, action, residual, true);
}

VqcGradient grad_serial(const EncodedState &encoded, const VqcParams &params,
                        const VqcConfig &config, std::size_t action, double residual) {
    return grad_impl(encoded, params, config, action, residual, false);
}

VqcParams apply_update(VqcParams params, const VqcGradient &gradient, double learning_rate) {
    if (gradient.angles.size() != params.angles.size() ||
        gradient.weights.size() != params.weights.size())
        throw InputError("gradient shape does not match parameters");
    for (std::size_t i = 0; i < params.angles.size(); ++i)
        params.angles[i] -= learning_rate * gradient.angles[i];
    for (std::size_t i = 0; i < params.weights.size(); ++i)
        params.weights[i] -= learning_rate * gradient.weights[i];
    return params;
}

nlohmann::json checkpoint(const VqcParams &params, const VqcConfig &config) {
    return {{"kind", "vqc"},
            {"config",
             {{"n_qubits", config.n_qubits},
              {"n_layers", config.n_layers},
              {"n_actions", config.n_actions},
              {"tie_ry_rz", config.tie_ry_rz}}},
            {"angles", params.angles},
            {"weights", params.weights}};
}

VqcParams load_checkpoint(const nlohmann::json &doc, const VqcConfig &config) {
    try {
        if (doc.at("kind").get<std::string>() != "vqc")
            throw InputError("checkpoint is not a VQC checkpoint");
        const auto &c = doc.at("config");
        if (c.at("n_qubits").get<std::size_t>() != config.n_qubits ||
            c.at("n_layers").get<std::size_t>() != config.n_layers ||
            c.at("n_actions").get<std::size_t>() != config.n_actions ||
            c.at("tie_ry_rz").get<bool>() != config.tie_ry_rz)
            throw InputError("checkpoint config does not match the active VQC config");
        VqcParams p;
        p.angles = doc.at("angles").get<std::vector<double>>();
        p.weights = doc.at("weights").get<std::vector<double>>();
        if (p.angles.size() != config.n_angles() || p.weights.size() != config.n_weights())
            throw InputError("checkpoint parameter shapes do not match config");
        return p;
    } catch (const nlohmann::json::exception &e) {
        throw InputError(std::string("malformed VQC checkpoint: ") + e.what());
    }
}

} // namespace qmarket::qfunc
