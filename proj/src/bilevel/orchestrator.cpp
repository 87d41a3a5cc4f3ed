#include "qmarket/bilevel/orchestrator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <string>

#include "qmarket/error.hpp"
#include "qmarket/market/clearing.hpp"
#include "qmarket/market/metrics.hpp"

namespace qmarket::bilevel {

using market::MechanismParams;

void validate(const RewardWeights &w) {
    if (!(w.w1 >= 0.0) || !(w.w2 >= 0.0) || std::abs(w.w1 + w.w2 - 1.0) > 1e-9)
        throw InputError("reward_weights: w1, w2 must be >= 0 and sum to 1");
    if (!(w.sw_normalizer >= 0.0))
        throw InputError("reward_weights.sw_normalizer must be >= 0 (0 = automatic)");
}

void validate(const StopRule &r) {
    if (!(r.threshold > 0.0 && r.threshold < 1.0))
        throw InputError("stop_rule.threshold must be in (0, 1)");
    if (r.window == 0)
        throw InputError("stop_rule.window must be >= 1");
    if (r.max_steps == 0)
        throw InputError("stop_rule.max_steps must be >= 1");
}

double upper_reward(const market::MarketMetrics &metrics, const RewardWeights &weights) {
    if (!(weights.sw_normalizer > 0.0))
        throw InputError("sw_normalizer must be > 0");
    const double sw = std::clamp(metrics.social_welfare / weights.sw_normalizer, 0.0, 1.0);
    return weights.w1 * sw + weights.w2 * metrics.renewable_penetration;
}

bool should_stop(std::span<const double> sw_history, const StopRule &rule) {
    if (sw_history.size() >= rule.max_steps)
        return true;
    if (sw_history.size() < rule.window + 1)
        return false;
    for (std::size_t k = sw_history.size() - rule.window; k < sw_history.size(); ++k) {
        const double prev = sw_history[k - 1];
        const double change = std::abs(sw_history[k] - prev) / std::max(std::abs(prev), 1.0);
        if (!(change < rule.threshold))
            return false;
    }
    return true;
}

std::string_view to_string(Backend b) { return b == Backend::vqc ? "vqc" : "mlp"; }

Backend backend_from_string(std::string_view s) {
    if (s == "vqc")
        return Backend::vqc;
    if (s == "mlp")
        return Backend::mlp;
    throw InputError("unknown backend '" + std::string(s) + "' (expected vqc or mlp)");
}

std::array<double, 6> bidding_features(double demand, double peak_demand, std::size_t hour,
                                       double prev_price, double prev_dispatch, double capacity,
                                       bool prev_participation, double price_cap,
                                       double price_cap_max) {
    auto unit = [](double v) { return std::isfinite(v) ? std::clamp(v, 0.0, 1.0) : 0.0; };
    return {
        unit(peak_demand > 0.0 ? demand / peak_demand : 0.0),
        unit(static_cast<double>(hour) / 23.0),
        unit(price_cap > 0.0 ? prev_price / price_cap : 0.0),
        unit(capacity > 0.0 ? prev_dispatch / capacity : 0.0),
        prev_participation ? 1.0 : 0.0,
        unit(price_cap_max > 0.0 ? price_cap / price_cap_max : 0.0),
    };
}

std::unique_ptr<qfunc::QFunction> make_qfunction(const LowerLevelConfig &config, RngStream &rng) {
    const std::size_t n_actions = config.agent.n_actions();
    if (config.backend == Backend::vqc) {
        auto vc = config.vqc;
        vc.n_actions = n_actions;
        auto params = qfunc::init_params(vc, rng);
        return std::make_unique<qfunc::VqcQFunction>(vc, std::move(params));
    }
    auto mc = config.mlp;
    mc.n_actions = n_actions;
    auto params = qfunc::init_params(mc, rng);
    return std::make_unique<qfunc::MlpQFunction>(mc, std::move(params));
}

MarketLowerLevel::MarketLowerLevel(std::vector<market::GencoSpec> fleet, DemandProfile demand,
                                   LowerLevelConfig config, std::uint64_t master_seed)
    : fleet_(std::move(fleet)), demand_(std::move(demand)), config_(std::move(config)),
      seed_(master_seed), market_rng_(master_seed, "market") {
    market::validate_fleet(fleet_);
    rl::validate(config_.agent);
    if (demand_.days() == 0)
        throw InputError("demand profile is empty");
    if (!(config_.valuation > 0.0))
        throw InputError("valuation must be > 0");
    for (std::size_t i = 0; i < fleet_.size(); ++i) {
        explore_rng_.emplace_back(master_seed, "agent/" + std::to_string(i) + "/explore");
        train_rng_.emplace_back(master_seed, "agent/" + std::to_string(i) + "/train");
    }
    build_agents();
}

void MarketLowerLevel::build_agents() {
    agents_.clear();
    for (std::size_t i = 0; i < fleet_.size(); ++i) {
        // Cold starts draw fresh initial weights each month.
        RngStream init(seed_, "agent/" + std::to_string(i) + "/init/" +
                                  std::to_string(config_.warm_start ? 0 : months_run_));
        agents_.emplace_back(config_.agent, make_qfunction(config_, init));
    }
}

double MarketLowerLevel::sw_bound() const { return config_.valuation * demand_.total(); }

MonthReport MarketLowerLevel::run_month(const MechanismParams &mech) {
    if (!(mech.price_cap > 0.0))
        throw InputError("price cap must be > 0");
    if (!(mech.penalty_coeff >= 0.0 && mech.penalty_coeff <= 1.0))
        throw InputError("penalty coefficient must be in [0, 1]");
    if (!config_.warm_start && months_run_ > 0)
        build_agents();

    const auto start = std::chrono::steady_clock::now();
    const std::size_t n = fleet_.size();
    const std::size_t levels = config_.agent.n_bid_levels;
    const double peak = demand_.peak();

    MonthReport report;
    report.mechanism = mech;
    report.agent_rewards.assign(n, 0.0);
    report.hourly.reserve(demand_.days() * kHoursPerDay);

    double prev_price = 0.0;
    std::vector<double> prev_dispatch(n, 0.0);
    std::vector<char> prev_part(n, 0);
    std::vector<double> loss_sum(n, 0.0);
    std::vector<std::size_t> loss_count(n, 0);

    auto features_for = [&](std::size_t i, std::size_t day, std::size_t hour) {
        return bidding_features(demand_.at(day, hour), peak, hour, prev_price, prev_dispatch[i],
                                fleet_[i].capacity, prev_part[i] != 0, mech.price_cap,
                                config_.price_cap_max);
    };

    for (std::size_t day = 0; day < demand_.days(); ++day) {
        std::vector<double> day_loss(n, 0.0), day_reward(n, 0.0);
        std::vector<std::size_t> day_loss_count(n, 0);
        for (std::size_t hour = 0; hour < kHoursPerDay; ++hour) {
            const double demand = demand_.at(day, hour);
            std::vector<std::array<double, 6>> state(n);
            std::vector<std::size_t> action(n);
            std::vector<market::Bid> bids(n);
            double offered = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                state[i] = features_for(i, day, hour);
                action[i] = agents_[i].select_action(state[i], explore_rng_[i]);
                bids[i] = rl::make_bid(fleet_[i], action[i], mech, levels);
                if (bids[i].participate)
                    offered += bids[i].quantity;
            }

            auto result = market::clear_hour(bids, demand, mech);
            std::vector<double> reward(n);
            for (std::size_t i = 0; i < n; ++i) {
                const double realized =
                    market::realize_renewable(fleet_[i], result.dispatch[i], market_rng_);
                reward[i] = market::genco_reward(fleet_[i], bids[i], result, realized,
                                                 prev_part[i] != 0, mech);
            }

            prev_price = result.clearing_price;
            for (std::size_t i = 0; i < n; ++i) {
                prev_dispatch[i] = result.dispatch[i];
                prev_part[i] = bids[i].participate ? 1 : 0;
            }

            // The next observation is the following hour of the same day; the
            // last hour ends the episode and its successor is never bootstrapped.
            const bool terminal = hour + 1 == kHoursPerDay;
            const std::size_t next_hour = terminal ? 0 : hour + 1;
            const std::size_t next_day = terminal ? std::min(day + 1, demand_.days() - 1) : day;

            std::vector<rl::Experience> exps(n);
            for (std::size_t i = 0; i < n; ++i) {
                const auto next = features_for(i, next_day, next_hour);
                exps[i] = rl::Experience{{state[i].begin(), state[i].end()},
                                         action[i],
                                         reward[i] / config_.agent.reward_scale,
                                         {next.begin(), next.end()},
                                         terminal};
            }

            std::vector<double> step_loss(n, -1.0);
            const auto n_agents = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(dynamic)
            for (std::int64_t ii = 0; ii < n_agents; ++ii) {
                const auto i = static_cast<std::size_t>(ii);
                agents_[i].remember(std::move(exps[i]));
                if (auto loss = agents_[i].train_step(train_rng_[i]))
                    step_loss[i] = *loss;
            }

            for (std::size_t i = 0; i < n; ++i) {
                report.agent_rewards[i] += reward[i];
                day_reward[i] += reward[i];
                if (step_loss[i] >= 0.0) {
                    loss_sum[i] += step_loss[i];
                    ++loss_count[i];
                    day_loss[i] += step_loss[i];
                    ++day_loss_count[i];
                }
            }
            report.demand += demand;
            report.served += result.served();
            report.offered.push_back(offered);
            report.hourly.push_back(std::move(result));
        }
        for (std::size_t i = 0; i < n; ++i) {
            report.telemetry.push_back(
                {days_run_, i,
                 day_loss_count[i] ? day_loss[i] / static_cast<double>(day_loss_count[i]) : 0.0,
                 agents_[i].epsilon(), day_reward[i] / static_cast<double>(kHoursPerDay)});
        }
        ++days_run_;
    }

    report.metrics =
        market::market_metrics(report.hourly, fleet_, report.offered, config_.valuation);
    for (std::size_t i = 0; i < n; ++i) {
        report.agent_mean_loss.push_back(
            loss_count[i] ? loss_sum[i] / static_cast<double>(loss_count[i]) : 0.0);
        report.agent_epsilon.push_back(agents_[i].epsilon());
    }
    ++months_run_;
    report.duration_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

ExperimentRecord run_experiment(LowerLevel &lower, const ExperimentSettings &settings,
                                const MonthObserver &observer) {
    rl::validate(settings.ppo);
    validate(settings.stop);
    auto weights = settings.weights;
    validate(weights);
    if (weights.sw_normalizer == 0.0)
        weights.sw_normalizer = lower.sw_bound();

    RngStream init_rng(settings.seed, "ppo/init");
    RngStream sample_rng(settings.seed, "ppo/sample");
    RngStream update_rng(settings.seed, "ppo/update");
    auto policy = rl::init_policy(settings.ppo, init_rng);

    ExperimentRecord record;
    std::vector<double> sw_history;

    auto finish_month = [&](MonthReport month) {
        const double r = upper_reward(month.metrics, weights);
        sw_history.push_back(month.metrics.social_welfare);
        record.rewards.push_back(r);
        record.months.push_back(std::move(month));
        // Highest reward wins; earliest month on ties.
        const auto best = static_cast<std::size_t>(
            std::max_element(record.rewards.begin(), record.rewards.end()) -
            record.rewards.begin());
        record.best_month = best;
        record.final_mechanism = record.months[best].mechanism;
        record.final_social_welfare = record.months[best].metrics.social_welfare;
        return r;
    };

    finish_month(lower.run_month(settings.initial_mechanism));
    if (observer)
        observer(record);

    while (!should_stop(sw_history, settings.stop)) {
        const auto state = rl::make_upper_state(record.months.back().metrics);
        const auto action = rl::sample_action(state, policy, settings.ppo, sample_rng);

        rl::Transition t;
        t.state = state;
        t.action = action.mechanism;
        t.raw = action.raw;
        t.log_prob = action.log_prob;
        t.value = rl::value(policy, state);
        t.reward = finish_month(lower.run_month(action.mechanism));
        t.next_state = rl::make_upper_state(record.months.back().metrics);

        PpoTraceRow row;
        row.step = record.months.size() - 1;
        row.mechanism = action.mechanism;
        row.reward = t.reward;
        policy = rl::ppo_update(std::span<const rl::Transition>(&t, 1), std::move(policy),
                                settings.ppo, update_rng, &row.report);
        record.ppo_trace.push_back(row);
        if (observer)
            observer(record);
    }
    record.converged = sw_history.size() < settings.stop.max_steps;
    return record;
}

} // namespace qmarket::bilevel
