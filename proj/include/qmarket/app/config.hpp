#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "qmarket/bilevel/orchestrator.hpp"
#include "qmarket/bilevel/scenario.hpp"
#include "qmarket/error.hpp"

namespace qmarket::app {

/// A configuration problem tied to one dotted field path.
class ConfigError : public InputError {
  public:
    ConfigError(std::string field, const std::string &what)
        : InputError(field.empty() ? what : field + ": " + what), field_(std::move(field)) {}

    const std::string &field() const noexcept { return field_; }

  private:
    std::string field_;
};

struct ExperimentConfig {
    std::string fleet_path;   // empty: bundled synthetic fleet
    std::string demand_path;  // empty: bundled sinusoidal demand
    std::size_t days = 30;
    bilevel::LowerLevelConfig lower;
    bilevel::ExperimentSettings settings;
    bool write_hourly = false;

    bool operator==(const ExperimentConfig &) const = default;
};

/// Cross-field checks. Throws ConfigError naming the field.
void validate(const ExperimentConfig &config);

/// Fills every field present in `doc` over the defaults, rejects unknown
/// keys and validates. Relative dataset paths are resolved against
/// `base_dir`.
ExperimentConfig parse_config(const nlohmann::json &doc,
                              const std::filesystem::path &base_dir = {});

/// Parses JSON text; syntax errors report line and column.
ExperimentConfig parse_config_text(std::string_view text,
                                   const std::filesystem::path &base_dir = {});

ExperimentConfig load_config(const std::filesystem::path &path);

/// Complete, explicit form of a config. parse_config(config_to_json(c)) == c.
nlohmann::json config_to_json(const ExperimentConfig &config);

/// Tiny horizons: 2 days per month, at most 2 upper steps.
void apply_smoke(ExperimentConfig &config);

struct Scenario {
    std::vector<market::GencoSpec> fleet;
    bilevel::DemandProfile demand;
};

/// Loads (or builds) the fleet and the demand for `config.days` days. Throws
/// ConfigError when a dataset is missing or malformed.
Scenario load_scenario(const ExperimentConfig &config);

} // namespace qmarket::app
