#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "qmarket/bilevel/scenario.hpp"
#include "qmarket/market/types.hpp"
#include "qmarket/qfunc/mlp.hpp"
#include "qmarket/qfunc/vqc.hpp"
#include "qmarket/rl/madqn.hpp"
#include "qmarket/rl/ppo.hpp"

namespace qmarket::bilevel {

struct RewardWeights {
    double w1 = 0.7;
    double w2 = 0.3;
    /// Divides social welfare before weighting. 0 means "use the lower
    /// level's bound", V times total monthly demand.
    double sw_normalizer = 0.0;

    bool operator==(const RewardWeights &) const = default;
};

void validate(const RewardWeights &w);

struct StopRule {
    double threshold = 0.20;
    std::size_t window = 3;
    std::size_t max_steps = 15;

    bool operator==(const StopRule &) const = default;
};

void validate(const StopRule &r);

/// w1 * clamp(SW / sw_normalizer, 0, 1) + w2 * RP. Requires a positive
/// normalizer.
double upper_reward(const market::MarketMetrics &metrics, const RewardWeights &weights);

/// True when the last `window` relative changes
/// |SW_T - SW_{T-1}| / max(|SW_{T-1}|, 1) are all below the threshold, or
/// the history already holds max_steps months.
bool should_stop(std::span<const double> sw_history, const StopRule &rule);

enum class Backend { vqc, mlp };

std::string_view to_string(Backend b);
Backend backend_from_string(std::string_view s);

struct LowerLevelConfig {
    Backend backend = Backend::vqc;
    rl::AgentConfig agent;
    qfunc::VqcConfig vqc;
    qfunc::MlpConfig mlp;
    double valuation = 500.0;       // consumer value of served energy, USD/MWh
    double price_cap_max = 500.0;   // scales the price-cap feature
    bool warm_start = true;         // agents keep learning across months

    bool operator==(const LowerLevelConfig &) const = default;
};

/// Agent observation at bid time:
/// [demand / peak, hour / 23, previous clearing price / PC,
///  own previous dispatch / capacity, previous participation (0/1), PC / PC_max],
/// each clipped into [0, 1].
std::array<double, 6> bidding_features(double demand, double peak_demand, std::size_t hour,
                                       double prev_price, double prev_dispatch, double capacity,
                                       bool prev_participation, double price_cap,
                                       double price_cap_max);

struct AgentTelemetry {
    std::size_t episode = 0;  // day index across the whole experiment
    std::size_t agent = 0;
    double mean_loss = 0.0;   // over the day's training steps, 0 if none ran
    double epsilon = 0.0;     // at the end of the day
    double mean_reward = 0.0; // USD per hour
};

struct MonthReport {
    market::MechanismParams mechanism;
    market::MarketMetrics metrics;
    std::vector<double> agent_rewards;  // cumulative USD per agent
    std::vector<double> agent_mean_loss;
    std::vector<double> agent_epsilon;
    std::vector<AgentTelemetry> telemetry;
    std::vector<market::HourlyClearingResult> hourly;
    std::vector<double> offered;  // total offered MW per hour
    double demand = 0.0;          // MWh over the month
    double served = 0.0;
    double duration_seconds = 0.0;
};

/// What the upper level sees of the lower level.
class LowerLevel {
  public:
    virtual ~LowerLevel() = default;
    virtual MonthReport run_month(const market::MechanismParams &mech) = 0;
    /// Largest attainable social welfare of one month.
    virtual double sw_bound() const = 0;
};

/// The multi-agent market: one DQN learner per GENCO bidding into hourly
/// merit-order clearing.
class MarketLowerLevel final : public LowerLevel {
  public:
    MarketLowerLevel(std::vector<market::GencoSpec> fleet, DemandProfile demand,
                     LowerLevelConfig config, std::uint64_t master_seed);

    MonthReport run_month(const market::MechanismParams &mech) override;
    double sw_bound() const override;

    std::vector<rl::DqnAgent> &agents() { return agents_; }
    const std::vector<market::GencoSpec> &fleet() const { return fleet_; }
    const DemandProfile &demand() const { return demand_; }
    const LowerLevelConfig &config() const { return config_; }

  private:
    void build_agents();

    std::vector<market::GencoSpec> fleet_;
    DemandProfile demand_;
    LowerLevelConfig config_;
    std::uint64_t seed_;
    std::vector<rl::DqnAgent> agents_;
    RngStream market_rng_;
    std::vector<RngStream> explore_rng_;
    std::vector<RngStream> train_rng_;
    std::size_t months_run_ = 0;
    std::size_t days_run_ = 0;
};

std::unique_ptr<qfunc::QFunction> make_qfunction(const LowerLevelConfig &config, RngStream &rng);

struct ExperimentSettings {
    market::MechanismParams initial_mechanism;
    rl::PpoConfig ppo;
    RewardWeights weights;
    StopRule stop;
    std::uint64_t seed = 0;

    bool operator==(const ExperimentSettings &) const = default;
};

struct PpoTraceRow {
    std::size_t step = 0;
    market::MechanismParams mechanism;
    double reward = 0.0;
    rl::PpoReport report;
};

struct ExperimentRecord {
    std::vector<MonthReport> months;
    std::vector<double> rewards;  // r_T per month, the initial month included
    std::vector<PpoTraceRow> ppo_trace;
    std::size_t best_month = 0;
    market::MechanismParams final_mechanism;
    double final_social_welfare = 0.0;
    bool converged = false;  // stopped by the change threshold, not the step cap
};

/// Called after every completed month with the record so far.
using MonthObserver = std::function<void(const ExperimentRecord &)>;

/// Closed loop: month 0 runs the initial mechanism; every later month runs a
/// PPO-sampled mechanism, scores it with upper_reward and feeds one PPO
/// update. Stops on should_stop. The final mechanism is the one of the
/// highest-reward month.
ExperimentRecord run_experiment(LowerLevel &lower, const ExperimentSettings &settings,
                                const MonthObserver &observer = {});

} // namespace qmarket::bilevel
