#pragma once

#include <cstddef>
#include <deque>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "qmarket/market/types.hpp"
#include "qmarket/qfunc/qfunction.hpp"
#include "qmarket/rng.hpp"

namespace qmarket::rl {

/// Linear decay from `start` to `end` over `decay_steps` training steps.
struct EpsilonSchedule {
    double start = 1.0;
    double end = 0.05;
    std::size_t decay_steps = 2000;

    double at(std::size_t step) const;
    bool operator==(const EpsilonSchedule &) const = default;
};

struct AgentConfig {
    double gamma = 0.9;
    double learning_rate = 0.01;
    EpsilonSchedule epsilon;
    std::size_t replay_capacity = 2000;
    std::size_t batch_size = 16;
    std::size_t target_sync_period = 50;  // training steps between target copies
    std::size_t n_bid_levels = 10;        // K; actions are opt-out plus K price levels
    double reward_scale = 1000.0;         // USD rewards are divided by this before storage

    std::size_t n_actions() const { return n_bid_levels + 1; }
    bool operator==(const AgentConfig &) const = default;
};

void validate(const AgentConfig &config);

struct Experience {
    std::vector<double> state;
    std::size_t action = 0;
    double reward = 0.0;
    std::vector<double> next_state;
    bool terminal = false;
};

/// Fixed-capacity FIFO ring of experiences. Index 0 is the oldest entry.
class ReplayBuffer {
  public:
    explicit ReplayBuffer(std::size_t capacity);

    void push(Experience e);
    std::size_t size() const { return items_.size(); }
    std::size_t capacity() const { return capacity_; }
    const Experience &operator[](std::size_t i) const { return items_[i]; }

    /// Uniform sampling with replacement.
    std::vector<const Experience *> sample(std::size_t batch, RngStream &rng) const;

  private:
    std::size_t capacity_;
    std::deque<Experience> items_;
};

/// One entry of the discretized bid space.
struct BidAction {
    bool participate = false;
    double price = 0.0;
};

/// Action 0 opts out; action k in 1..K bids price_cap * k / K at full capacity.
std::vector<BidAction> action_space(const market::MechanismParams &mech, std::size_t n_levels);

/// Turns an action index into a market bid for `spec`.
market::Bid make_bid(const market::GencoSpec &spec, std::size_t action,
                     const market::MechanismParams &mech, std::size_t n_levels);

/// Argmax with ties broken toward the lowest index.
std::size_t greedy_action(std::span<const double> q);

/// y = r + gamma * max_a' Q_target(s', a'), or r alone for terminal experiences.
double compute_target(const Experience &e, const qfunc::QFunction &target, double gamma);

/// Independent DQN learner: online and target Q-functions, replay memory and
/// an exploration schedule. Owned by exactly one worker at a time.
class DqnAgent {
  public:
    DqnAgent(AgentConfig config, std::unique_ptr<qfunc::QFunction> online);

    DqnAgent(const DqnAgent &other);
    DqnAgent &operator=(const DqnAgent &other);
    DqnAgent(DqnAgent &&) noexcept = default;
    DqnAgent &operator=(DqnAgent &&) noexcept = default;

    /// Epsilon-greedy over the online Q-function.
    std::size_t select_action(std::span<const double> features, RngStream &rng) const;

    void remember(Experience e) { replay_.push(std::move(e)); }

    /// One minibatch SGD step on the squared TD error. Returns the mean
    /// squared residual, or nothing (and changes nothing) while the replay
    /// memory holds fewer than batch_size experiences.
    std::optional<double> train_step(RngStream &rng);

    void sync_target();

    const qfunc::QFunction &online() const { return *online_; }
    qfunc::QFunction &online_mut() { return *online_; }
    const qfunc::QFunction &target() const { return *target_; }
    const ReplayBuffer &replay() const { return replay_; }
    const AgentConfig &config() const { return config_; }
    std::size_t steps() const { return steps_; }
    double epsilon() const { return epsilon_; }
    /// Overrides the scheduled value until the next training step.
    void set_epsilon(double eps) { epsilon_ = eps; }

  private:
    AgentConfig config_;
    std::unique_ptr<qfunc::QFunction> online_;
    std::unique_ptr<qfunc::QFunction> target_;
    ReplayBuffer replay_;
    std::size_t steps_ = 0;
    double epsilon_ = 1.0;
};

} // namespace qmarket::rl
