#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "qmarket/app/config.hpp"
#include "qmarket/bilevel/orchestrator.hpp"

namespace qmarket::app {

/// One row of monthly.csv.
struct MonthlyRow {
    std::size_t month = 0;
    market::MechanismParams mechanism;
    market::MarketMetrics metrics;
    double demand = 0.0;
    double served = 0.0;
    double reward = 0.0;

    bool operator==(const MonthlyRow &) const = default;
};

/// One row of ppo_trace.csv.
struct PpoTraceCsvRow {
    std::size_t step = 0;
    market::MechanismParams mechanism;
    double reward = 0.0;
    double j_actor = 0.0;
    double j_critic = 0.0;
    double entropy = 0.0;
    double loss = 0.0;

    bool operator==(const PpoTraceCsvRow &) const = default;
};

/// One row of agents/agent_<i>.csv: per-day training telemetry.
struct AgentRow {
    std::size_t month = 0;
    std::size_t episode = 0;
    double mean_loss = 0.0;
    double epsilon = 0.0;
    double mean_reward = 0.0;

    bool operator==(const AgentRow &) const = default;
};

std::vector<MonthlyRow> monthly_rows(const bilevel::ExperimentRecord &record);
std::vector<PpoTraceCsvRow> ppo_rows(const bilevel::ExperimentRecord &record);
std::vector<AgentRow> agent_rows(const bilevel::ExperimentRecord &record, std::size_t agent);

void write_monthly_csv(std::ostream &os, const std::vector<MonthlyRow> &rows);
void write_ppo_csv(std::ostream &os, const std::vector<PpoTraceCsvRow> &rows);
void write_agent_csv(std::ostream &os, const std::vector<AgentRow> &rows);

/// Readers for the files above. Throw InputError on malformed content.
std::vector<MonthlyRow> read_monthly_csv(std::istream &is);
std::vector<PpoTraceCsvRow> read_ppo_csv(std::istream &is);
std::vector<AgentRow> read_agent_csv(std::istream &is);

nlohmann::json summary_json(const ExperimentConfig &config, const bilevel::ExperimentRecord &record,
                            bool complete);

/// Writes (or rewrites) the record directory:
///   config_echo.json, summary.json, monthly.csv, ppo_trace.csv,
///   agents/agent_<i>.csv, and hourly/month_<T>.csv when enabled.
/// Safe to call after every month so an aborted run leaves partial results.
void write_record(const std::filesystem::path &dir, const ExperimentConfig &config,
                  const bilevel::ExperimentRecord &record, bool complete);

std::string read_file(const std::filesystem::path &path);

} // namespace qmarket::app
