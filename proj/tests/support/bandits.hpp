#pragma once
// Single-state bandits for the PPO update: every update samples a small batch
// of one-step (terminal) transitions from a fixed state and applies one
// ppo_update.

#include <cmath>
#include <vector>

#include "qmarket/rl/ppo.hpp"

namespace support {

inline const qmarket::rl::UpperState kBanditState{0.25, 0.2, 0.5};

/// Reward 1 for MR = 0 (arm 0), 0 for MR = 1. Returns P(arm 0) after
/// `updates` updates.
inline double run_discrete_bandit(const qmarket::rl::PpoConfig &config, std::uint64_t seed,
                                  std::size_t updates, std::size_t batch_size) {
    using namespace qmarket;
    RngStream init(seed, "bandit/init"), sample(seed, "bandit/sample"),
        update(seed, "bandit/update");
    auto params = rl::init_policy(config, init);
    for (std::size_t u = 0; u < updates; ++u) {
        std::vector<rl::Transition> batch;
        for (std::size_t k = 0; k < batch_size; ++k) {
            const auto a = rl::sample_action(kBanditState, params, config, sample);
            rl::Transition t;
            t.state = kBanditState;
            t.next_state = kBanditState;
            t.action = a.mechanism;
            t.raw = a.raw;
            t.log_prob = a.log_prob;
            t.reward = a.raw.mr == 0 ? 1.0 : 0.0;
            t.terminal = true;
            t.value = rl::value(params, kBanditState);
            batch.push_back(t);
        }
        params = rl::ppo_update(batch, std::move(params), config, update);
    }
    return 1.0 - rl::policy(params, config, kBanditState).mr_probability();
}

/// Reward -((PC - optimum) / scale)^2 on the clamped cap. Returns the policy's
/// mean PC after `updates` updates.
inline double run_quadratic_bandit(const qmarket::rl::PpoConfig &config, std::uint64_t seed,
                                   std::size_t updates, std::size_t batch_size,
                                   double optimum = 300.0, double scale = 100.0) {
    using namespace qmarket;
    RngStream init(seed, "qbandit/init"), sample(seed, "qbandit/sample"),
        update(seed, "qbandit/update");
    auto params = rl::init_policy(config, init);
    for (std::size_t u = 0; u < updates; ++u) {
        std::vector<rl::Transition> batch;
        for (std::size_t k = 0; k < batch_size; ++k) {
            const auto a = rl::sample_action(kBanditState, params, config, sample);
            rl::Transition t;
            t.state = kBanditState;
            t.next_state = kBanditState;
            t.action = a.mechanism;
            t.raw = a.raw;
            t.log_prob = a.log_prob;
            const double x = (a.mechanism.price_cap - optimum) / scale;
            t.reward = -x * x;
            t.terminal = true;
            t.value = rl::value(params, kBanditState);
            batch.push_back(t);
        }
        params = rl::ppo_update(batch, std::move(params), config, update);
    }
    return rl::policy(params, config, kBanditState).mean_pc;
}

} // namespace support
