#include "qmarket/rl/madqn.hpp"

#include <algorithm>
#include <cmath>

#include "qmarket/error.hpp"

namespace qmarket::rl {

double EpsilonSchedule::at(std::size_t step) const {
    if (decay_steps == 0 || step >= decay_steps)
        return end;
    const double frac = static_cast<double>(step) / static_cast<double>(decay_steps);
    return start + (end - start) * frac;
}

void validate(const AgentConfig &c) {
    if (!(c.gamma >= 0.0 && c.gamma < 1.0))
        throw InputError("agent.gamma must be in [0, 1)");
    if (!(c.learning_rate >= 0.0))
        throw InputError("agent.learning_rate must be >= 0");
    if (!(c.epsilon.start >= 0.0 && c.epsilon.start <= 1.0 && c.epsilon.end >= 0.0 &&
          c.epsilon.end <= 1.0))
        throw InputError("agent.epsilon start/end must be in [0, 1]");
    if (c.batch_size == 0)
        throw InputError("agent.batch_size must be >= 1");
    if (c.replay_capacity < c.batch_size)
        throw InputError("agent.replay_capacity must be >= batch_size");
    if (c.target_sync_period == 0)
        throw InputError("agent.target_sync_period must be >= 1");
    if (c.n_bid_levels == 0)
        throw InputError("agent.n_bid_levels must be >= 1");
    if (!(c.reward_scale > 0.0))
        throw InputError("agent.reward_scale must be > 0");
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0)
        throw InputError("replay capacity must be >= 1");
}

void ReplayBuffer::push(Experience e) {
    if (items_.size() == capacity_)
        items_.pop_front();
    items_.push_back(std::move(e));
}

std::vector<const Experience *> ReplayBuffer::sample(std::size_t batch, RngStream &rng) const {
    std::vector<const Experience *> out;
    if (items_.empty())
        return out;
    out.reserve(batch);
    for (std::size_t i = 0; i < batch; ++i)
        out.push_back(&items_[rng.index(items_.size())]);
    return out;
}

std::vector<BidAction> action_space(const market::MechanismParams &mech, std::size_t n_levels) {
    if (!(mech.price_cap > 0.0))
        throw InputError("price cap must be > 0");
    if (n_levels == 0)
        throw InputError("need at least one bid level");
    std::vector<BidAction> actions;
    actions.reserve(n_levels + 1);
    actions.push_back({false, 0.0});
    for (std::size_t k = 1; k <= n_levels; ++k) {
        // The top level is exactly the cap, never a rounding step above it.
        const double price = k == n_levels ? mech.price_cap
                                           : mech.price_cap * static_cast<double>(k) /
                                                 static_cast<double>(n_levels);
        actions.push_back({true, price});
    }
    return actions;
}

market::Bid make_bid(const market::GencoSpec &spec, std::size_t action,
                     const market::MechanismParams &mech, std::size_t n_levels) {
    if (action > n_levels)
        throw InputError("action index out of range");
    const auto a = action_space(mech, n_levels)[action];
    return {spec.id, a.participate, a.price, a.participate ? spec.capacity : 0.0};
}

std::size_t greedy_action(std::span<const double> q) {
    std::size_t best = 0;
    for (std::size_t a = 1; a < q.size(); ++a)
        if (q[a] > q[best])
            best = a;
    return best;
}

double compute_target(const Experience &e, const qfunc::QFunction &target, double gamma) {
    if (e.terminal || gamma == 0.0)
        return e.reward;
    const auto q = target.q_values(e.next_state);
    return e.reward + gamma * *std::max_element(q.begin(), q.end());
}

DqnAgent::DqnAgent(AgentConfig config, std::unique_ptr<qfunc::QFunction> online)
    : config_(config), online_(std::move(online)), replay_(config.replay_capacity) {
    validate(config_);
    if (!online_)
        throw InputError("agent needs a Q-function");
    if (online_->n_actions() != config_.n_actions())
        throw InputError("Q-function action count does not match the bid space");
    target_ = online_->clone();
    epsilon_ = config_.epsilon.at(0);
}

DqnAgent::DqnAgent(const DqnAgent &other)
    : config_(other.config_), online_(other.online_->clone()),
      target_(other.target_->clone()), replay_(other.replay_), steps_(other.steps_),
      epsilon_(other.epsilon_) {}

DqnAgent &DqnAgent::operator=(const DqnAgent &other) {
    if (this != &other) {
        DqnAgent copy(other);
        *this = std::move(copy);
    }
    return *this;
}

std::size_t DqnAgent::select_action(std::span<const double> features, RngStream &rng) const {
    // Always draw the exploration coin so the stream advances identically
    // whatever epsilon is.
    const double coin = rng.uniform();
    if (coin < epsilon_)
        return rng.index(online_->n_actions());
    return greedy_action(online_->q_values(features));
}

std::optional<double> DqnAgent::train_step(RngStream &rng) {
    if (replay_.size() < config_.batch_size)
        return std::nullopt;

    const auto batch = replay_.sample(config_.batch_size, rng);
    std::vector<double> total(online_->n_parameters(), 0.0);
    double loss = 0.0;
    for (const Experience *e : batch) {
        const double y = compute_target(*e, *target_, config_.gamma);
        const double q = online_->q_values(e->state)[e->action];
        const double residual = y - q;
        loss += residual * residual;
        if (residual == 0.0)
            continue;
        const auto g = online_->gradient(e->state, e->action, residual);
        for (std::size_t i = 0; i < total.size(); ++i)
            total[i] += g[i];
    }
    const double inv = 1.0 / static_cast<double>(batch.size());
    for (auto &g : total)
        g *= inv;
    online_->apply_update(total, config_.learning_rate);

    ++steps_;
    if (steps_ % config_.target_sync_period == 0)
        sync_target();
    epsilon_ = config_.epsilon.at(steps_);
    return loss * inv;
}

void DqnAgent::sync_target() { target_ = online_->clone(); }

} // namespace qmarket::rl
