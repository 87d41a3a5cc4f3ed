#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "qmarket/market/types.hpp"

#include <json.hpp>

namespace qmarket::market {

void to_json(nlohmann::json &j, const GencoSpec &g);
void from_json(const nlohmann::json &j, GencoSpec &g);
void to_json(nlohmann::json &j, const MechanismParams &m);
void from_json(const nlohmann::json &j, MechanismParams &m);

/// Reads a GENCO dataset: {"gencos": [ {...}, ... ]}. Validates the fleet.
std::vector<GencoSpec> load_fleet(const std::filesystem::path &path);
std::vector<GencoSpec> parse_fleet(const nlohmann::json &doc);
nlohmann::json fleet_to_json(std::span<const GencoSpec> fleet);

/// CSV rows `hour,genco_id,dispatch,price,payment,unserved`, one per GENCO per
/// hour. `price` is the hour's clearing price.
void write_clearing_csv(std::ostream &os, std::span<const HourlyClearingResult> results,
                        bool header = true);

} // namespace qmarket::market
