#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "qmarket/market/types.hpp"
#include "qmarket/qfunc/mlp.hpp"
#include "qmarket/rng.hpp"

namespace qmarket::rl {

/// Upper-level observation, every component scaled into [0, 1].
struct UpperState {
    double hhi = 0.0;                    // HHI / 10000
    double renewable_penetration = 0.0;
    double supply_demand = 0.0;          // clip(SDR, 0, 3) / 3

    std::array<double, 3> as_array() const { return {hhi, renewable_penetration, supply_demand}; }
    bool operator==(const UpperState &) const = default;
};

UpperState make_upper_state(const market::MarketMetrics &m);

struct Bounds {
    double lo = 0.0;
    double hi = 1.0;
    double center() const { return 0.5 * (lo + hi); }
    double half_width() const { return 0.5 * (hi - lo); }
    bool operator==(const Bounds &) const = default;
};

struct PpoConfig {
    double clip = 0.2;
    double entropy_coeff = 1.0;  // beta in -beta * H
    double c1 = 0.5;             // critic weight in the combined loss
    double c2 = 0.01;            // entropy weight in the combined loss
    double gamma = 0.9;
    double actor_lr = 3e-3;
    double critic_lr = 1e-2;
    std::size_t epochs = 4;
    std::size_t minibatch_size = 0;  // 0 = whole batch
    std::size_t hidden = 32;
    Bounds price_cap{50.0, 500.0};
    Bounds penalty{0.05, 0.15};
    double init_log_std_pc = 2.0;
    double init_log_std_penalty = -4.0;

    bool operator==(const PpoConfig &) const = default;
};

void validate(const PpoConfig &config);

inline constexpr double kLogStdMin = -5.0;
inline constexpr double kLogStdMax = 2.0;

/// Actor (3 -> hidden tanh -> [PC mean, P mean, MR logit]) with two
/// state-independent log-stds, and a separate critic (3 -> hidden tanh -> 1).
///
/// Actor outputs are affine in the action bounds: mean PC is
/// center + half_width * out[0], likewise for P. The Gaussians live in native
/// units (USD/MWh for PC, fraction for P).
struct PolicyParams {
    qfunc::MlpParams actor;
    double log_std_pc = 0.0;
    double log_std_penalty = 0.0;
    qfunc::MlpParams critic;

    bool operator==(const PolicyParams &) const = default;
};

PolicyParams init_policy(const PpoConfig &config, RngStream &rng);

/// Distribution parameters of the policy at one state.
struct PolicyOutput {
    double mean_pc = 0.0;
    double std_pc = 1.0;
    double mean_penalty = 0.0;
    double std_penalty = 1.0;
    double mr_logit = 0.0;

    double mr_probability() const;  // P(MR = pay_as_clear)
};

PolicyOutput policy(const PolicyParams &params, const PpoConfig &config, const UpperState &s);
double value(const PolicyParams &params, const UpperState &s);

/// Pre-projection draw: the Gaussian samples before clamping, and MR.
struct RawAction {
    double pc = 0.0;
    double penalty = 0.0;
    int mr = 0;
};

struct SampledAction {
    market::MechanismParams mechanism;
    RawAction raw;
    double log_prob = 0.0;
};

/// Draws a mechanism. The two Gaussians are clamped into their bounds after
/// the draw; the log-probability is that of the unclamped draw.
SampledAction sample_action(const UpperState &s, const PolicyParams &params,
                            const PpoConfig &config, RngStream &rng);

double log_prob(const PolicyParams &params, const PpoConfig &config, const UpperState &s,
                const RawAction &a);

/// Sum of two Gaussian entropies and the Bernoulli entropy.
double entropy(const PolicyOutput &out);

struct Transition {
    UpperState state;
    market::MechanismParams action;
    RawAction raw;
    double log_prob = 0.0;
    double reward = 0.0;
    UpperState next_state;
    bool terminal = false;
    double value = 0.0;
};

/// One-step TD advantage r + gamma * V_old(s') - V_old(s); no bootstrap on
/// terminal transitions.
double advantage(const Transition &t, const PolicyParams &old_params, double gamma);

/// r + gamma * V_old(s'), or r on terminal transitions.
double critic_target(const Transition &t, const PolicyParams &old_params, double gamma);

/// Mean clipped surrogate min(r A, clip(r, 1-eps, 1+eps) A).
double actor_objective(std::span<const Transition> batch, const PolicyParams &params,
                       const PpoConfig &config, std::span<const double> old_log_probs,
                       std::span<const double> advantages);

/// The per-sample clipped surrogate term.
double clipped_surrogate(double ratio, double adv, double clip);

/// Mean of (V(s) - target)^2.
double critic_loss(std::span<const Transition> batch, const PolicyParams &params,
                   std::span<const double> targets);

/// -beta * mean policy entropy.
double entropy_bonus(std::span<const Transition> batch, const PolicyParams &params,
                     const PpoConfig &config, double beta);

struct PpoReport {
    double j_actor = 0.0;
    double j_critic = 0.0;
    double entropy = 0.0;  // mean policy entropy
    double loss = 0.0;     // -J_actor + c1 J_critic + c2 J_entropy
};

/// Gradients of the combined loss, split by network.
struct PolicyGradient {
    qfunc::MlpParams actor;
    double log_std_pc = 0.0;
    double log_std_penalty = 0.0;
    qfunc::MlpParams critic;
};

/// d/d(actor) of (-J_actor + c2 * J_entropy) and d/d(critic) of J_critic over
/// `batch`, with old log-probs, advantages and critic targets frozen.
PolicyGradient loss_gradient(std::span<const Transition> batch, const PolicyParams &params,
                             const PpoConfig &config, std::span<const double> old_log_probs,
                             std::span<const double> advantages,
                             std::span<const double> targets);

/// Runs `epochs` passes of minibatch gradient steps. Advantages, critic
/// targets and old log-probs are computed once from the incoming params and
/// held fixed. Throws InputError on an empty batch.
PolicyParams ppo_update(std::span<const Transition> batch, PolicyParams params,
                        const PpoConfig &config, RngStream &rng, PpoReport *report = nullptr);

} // namespace qmarket::rl
