#include "qmarket/rl/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "qmarket/error.hpp"

namespace qmarket::rl {

namespace {

constexpr double kLog2Pi = 1.8378770664093453;  // ln(2 pi)

double sigmoid(double x) {
    return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

// log sigmoid(x), stable for large |x|.
double log_sigmoid(double x) { return x >= 0.0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x)); }

double gaussian_log_density(double x, double mean, double log_std) {
    const double z = (x - mean) * std::exp(-log_std);
    return -0.5 * z * z - log_std - 0.5 * kLog2Pi;
}

double clamp_log_std(double v) { return std::clamp(v, kLogStdMin, kLogStdMax); }

std::vector<double> actor_outputs(const PolicyParams &p, const UpperState &s) {
    const auto x = s.as_array();
    return qfunc::forward(x, p.actor);
}

void axpy(qfunc::MlpParams &acc, const qfunc::MlpParams &g, double scale) {
    for (std::size_t l = 0; l < acc.layers.size(); ++l) {
        auto &a = acc.layers[l];
        const auto &b = g.layers[l];
        for (std::size_t i = 0; i < a.weights.size(); ++i)
            a.weights[i] += scale * b.weights[i];
        for (std::size_t i = 0; i < a.bias.size(); ++i)
            a.bias[i] += scale * b.bias[i];
    }
}

void check_aligned(std::span<const Transition> batch, std::span<const double> a,
                   std::span<const double> b) {
    if (batch.empty())
        throw InputError("PPO batch is empty");
    if (a.size() != batch.size() || b.size() != batch.size())
        throw InputError("PPO per-sample arrays must align with the batch");
}

} // namespace

UpperState make_upper_state(const market::MarketMetrics &m) {
    UpperState s;
    s.hhi = std::clamp(m.hhi / 10000.0, 0.0, 1.0);
    s.renewable_penetration = std::clamp(m.renewable_penetration, 0.0, 1.0);
    s.supply_demand = std::clamp(m.supply_demand_ratio, 0.0, 3.0) / 3.0;
    return s;
}

void validate(const PpoConfig &c) {
    if (!(c.clip > 0.0 && c.clip < 1.0))
        throw InputError("ppo.clip must be in (0, 1)");
    if (!(c.actor_lr > 0.0) || !(c.critic_lr > 0.0))
        throw InputError("ppo learning rates must be > 0");
    if (!(c.gamma >= 0.0 && c.gamma < 1.0))
        throw InputError("ppo.gamma must be in [0, 1)");
    if (!(c.entropy_coeff >= 0.0) || !(c.c1 >= 0.0) || !(c.c2 >= 0.0))
        throw InputError("ppo loss coefficients must be >= 0");
    if (c.epochs == 0)
        throw InputError("ppo.epochs must be >= 1");
    if (c.hidden == 0)
        throw InputError("ppo.hidden must be >= 1");
    if (!(c.price_cap.lo > 0.0 && c.price_cap.lo < c.price_cap.hi))
        throw InputError("ppo.price_cap bounds must satisfy 0 < lo < hi");
    if (!(c.penalty.lo >= 0.0 && c.penalty.lo < c.penalty.hi && c.penalty.hi <= 1.0))
        throw InputError("ppo.penalty bounds must satisfy 0 <= lo < hi <= 1");
}

double PolicyOutput::mr_probability() const { return sigmoid(mr_logit); }

PolicyParams init_policy(const PpoConfig &config, RngStream &rng) {
    PolicyParams p;
    p.actor = qfunc::init_params({3, {config.hidden}, 3}, rng);
    p.critic = qfunc::init_params({3, {config.hidden}, 1}, rng);
    p.log_std_pc = clamp_log_std(config.init_log_std_pc);
    p.log_std_penalty = clamp_log_std(config.init_log_std_penalty);
    return p;
}

PolicyOutput policy(const PolicyParams &params, const PpoConfig &config, const UpperState &s) {
    const auto out = actor_outputs(params, s);
    PolicyOutput o;
    o.mean_pc = config.price_cap.center() + config.price_cap.half_width() * out[0];
    o.mean_penalty = config.penalty.center() + config.penalty.half_width() * out[1];
    o.mr_logit = out[2];
    o.std_pc = std::exp(clamp_log_std(params.log_std_pc));
    o.std_penalty = std::exp(clamp_log_std(params.log_std_penalty));
    return o;
}

double value(const PolicyParams &params, const UpperState &s) {
    const auto x = s.as_array();
    return qfunc::forward(x, params.critic)[0];
}

SampledAction sample_action(const UpperState &s, const PolicyParams &params,
                            const PpoConfig &config, RngStream &rng) {
    const auto o = policy(params, config, s);
    SampledAction out;
    out.raw.pc = rng.normal(o.mean_pc, o.std_pc);
    out.raw.penalty = rng.normal(o.mean_penalty, o.std_penalty);
    out.raw.mr = rng.uniform() < o.mr_probability() ? 1 : 0;
    out.mechanism.price_cap = std::clamp(out.raw.pc, config.price_cap.lo, config.price_cap.hi);
    out.mechanism.penalty_coeff =
        std::clamp(out.raw.penalty, config.penalty.lo, config.penalty.hi);
    out.mechanism.settlement =
        out.raw.mr == 1 ? market::Settlement::pay_as_clear : market::Settlement::pay_as_bid;
    out.log_prob = log_prob(params, config, s, out.raw);
    return out;
}

double log_prob(const PolicyParams &params, const PpoConfig &config, const UpperState &s,
                const RawAction &a) {
    const auto o = policy(params, config, s);
    const double lp_mr = a.mr == 1 ? log_sigmoid(o.mr_logit) : log_sigmoid(-o.mr_logit);
    return gaussian_log_density(a.pc, o.mean_pc, std::log(o.std_pc)) +
           gaussian_log_density(a.penalty, o.mean_penalty, std::log(o.std_penalty)) + lp_mr;
}

double entropy(const PolicyOutput &o) {
    const double gauss = 0.5 * (kLog2Pi + 1.0);
    const double p = o.mr_probability();
    double bern = 0.0;
    if (p > 0.0 && p < 1.0)
        bern = -p * std::log(p) - (1.0 - p) * std::log(1.0 - p);
    return gauss + std::log(o.std_pc) + gauss + std::log(o.std_penalty) + bern;
}

double critic_target(const Transition &t, const PolicyParams &old_params, double gamma) {
    if (t.terminal)
        return t.reward;
    return t.reward + gamma * value(old_params, t.next_state);
}

double advantage(const Transition &t, const PolicyParams &old_params, double gamma) {
    return critic_target(t, old_params, gamma) - value(old_params, t.state);
}

double clipped_surrogate(double ratio, double adv, double clip) {
    return std::min(ratio * adv, std::clamp(ratio, 1.0 - clip, 1.0 + clip) * adv);
}

double actor_objective(std::span<const Transition> batch, const PolicyParams &params,
                       const PpoConfig &config, std::span<const double> old_log_probs,
                       std::span<const double> advantages) {
    check_aligned(batch, old_log_probs, advantages);
    double total = 0.0;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const double ratio =
            std::exp(log_prob(params, config, batch[i].state, batch[i].raw) - old_log_probs[i]);
        total += clipped_surrogate(ratio, advantages[i], config.clip);
    }
    return total / static_cast<double>(batch.size());
}

double critic_loss(std::span<const Transition> batch, const PolicyParams &params,
                   std::span<const double> targets) {
    if (batch.empty())
        throw InputError("PPO batch is empty");
    if (targets.size() != batch.size())
        throw InputError("critic targets must align with the batch");
    double total = 0.0;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const double d = value(params, batch[i].state) - targets[i];
        total += d * d;
    }
    return total / static_cast<double>(batch.size());
}

double entropy_bonus(std::span<const Transition> batch, const PolicyParams &params,
                     const PpoConfig &config, double beta) {
    if (batch.empty() || beta == 0.0)
        return 0.0;
    double total = 0.0;
    for (const auto &t : batch)
        total += entropy(policy(params, config, t.state));
    return -beta * total / static_cast<double>(batch.size());
}

PolicyGradient loss_gradient(std::span<const Transition> batch, const PolicyParams &params,
                             const PpoConfig &config, std::span<const double> old_log_probs,
                             std::span<const double> advantages,
                             std::span<const double> targets) {
    check_aligned(batch, old_log_probs, advantages);
    if (targets.size() != batch.size())
        throw InputError("critic targets must align with the batch");

    PolicyGradient g;
    g.actor = qfunc::zero_params({3, {config.hidden}, 3});
    g.critic = qfunc::zero_params({3, {config.hidden}, 1});
    const double inv_n = 1.0 / static_cast<double>(batch.size());
    const double ent_w = config.c2 * config.entropy_coeff;

    for (std::size_t i = 0; i < batch.size(); ++i) {
        const auto &t = batch[i];
        const auto o = policy(params, config, t.state);
        const double ratio =
            std::exp(log_prob(params, config, t.state, t.raw) - old_log_probs[i]);
        const double adv = advantages[i];
        const double clipped = std::clamp(ratio, 1.0 - config.clip, 1.0 + config.clip);
        // The unclipped branch carries the gradient whenever it is the min.
        const double w = ratio * adv <= clipped * adv ? -adv * ratio * inv_n : 0.0;

        const double var_pc = o.std_pc * o.std_pc;
        const double var_p = o.std_penalty * o.std_penalty;
        const double dpc = t.raw.pc - o.mean_pc;
        const double dp = t.raw.penalty - o.mean_penalty;
        const double p_mr = o.mr_probability();

        // d(-J_actor)/d(actor outputs); d(log pi)/d(out) times w.
        std::array<double, 3> delta{
            w * config.price_cap.half_width() * dpc / var_pc,
            w * config.penalty.half_width() * dp / var_p,
            w * (static_cast<double>(t.raw.mr) - p_mr),
        };
        // c2 * (-beta * H): only the Bernoulli part depends on the network.
        delta[2] += -ent_w * inv_n * (-o.mr_logit * p_mr * (1.0 - p_mr));
        axpy(g.actor, qfunc::backprop(t.state.as_array(), params.actor, delta), 1.0);

        g.log_std_pc += w * (dpc * dpc / var_pc - 1.0) - ent_w * inv_n;
        g.log_std_penalty += w * (dp * dp / var_p - 1.0) - ent_w * inv_n;

        const double v = value(params, t.state);
        const std::array<double, 1> dv{2.0 * (v - targets[i]) * inv_n};
        axpy(g.critic, qfunc::backprop(t.state.as_array(), params.critic, dv), 1.0);
    }
    return g;
}

PolicyParams ppo_update(std::span<const Transition> batch, PolicyParams params,
                        const PpoConfig &config, RngStream &rng, PpoReport *report) {
    if (batch.empty())
        throw InputError("PPO batch is empty");

    const PolicyParams old = params;
    std::vector<double> old_lp(batch.size()), adv(batch.size()), targets(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
        old_lp[i] = batch[i].log_prob;
        adv[i] = advantage(batch[i], old, config.gamma);
        targets[i] = critic_target(batch[i], old, config.gamma);
    }

    const std::size_t mb = config.minibatch_size == 0
                               ? batch.size()
                               : std::min(config.minibatch_size, batch.size());
    std::vector<std::size_t> order(batch.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    std::vector<Transition> mb_batch;
    std::vector<double> mb_lp, mb_adv, mb_tgt;
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        if (mb < batch.size())
            std::shuffle(order.begin(), order.end(), rng.engine());
        for (std::size_t start = 0; start < order.size(); start += mb) {
            const std::size_t end = std::min(start + mb, order.size());
            mb_batch.clear();
            mb_lp.clear();
            mb_adv.clear();
            mb_tgt.clear();
            for (std::size_t k = start; k < end; ++k) {
                mb_batch.push_back(batch[order[k]]);
                mb_lp.push_back(old_lp[order[k]]);
                mb_adv.push_back(adv[order[k]]);
                mb_tgt.push_back(targets[order[k]]);
            }
            const auto g = loss_gradient(mb_batch, params, config, mb_lp, mb_adv, mb_tgt);
            axpy(params.actor, g.actor, -config.actor_lr);
            params.log_std_pc = clamp_log_std(params.log_std_pc - config.actor_lr * g.log_std_pc);
            params.log_std_penalty =
                clamp_log_std(params.log_std_penalty - config.actor_lr * g.log_std_penalty);
            axpy(params.critic, g.critic, -config.critic_lr);
        }
    }

    if (report) {
        report->j_actor = actor_objective(batch, params, config, old_lp, adv);
        report->j_critic = critic_loss(batch, params, targets);
        double h = 0.0;
        for (const auto &t : batch)
            h += entropy(policy(params, config, t.state));
        report->entropy = h / static_cast<double>(batch.size());
        report->loss = -report->j_actor + config.c1 * report->j_critic +
                       config.c2 * entropy_bonus(batch, params, config, config.entropy_coeff);
    }
    return params;
}

} // namespace qmarket::rl
