#pragma once

#include <string_view>
#include <vector>

namespace qmarket::market {

enum class GencoKind { thermal, renewable };

/// Static description of one generating company.
struct GencoSpec {
    int id = 0;
    GencoKind kind = GencoKind::thermal;
    double capacity = 0.0;        // MW
    double marginal_cost = 0.0;   // USD/MWh
    double fixed_cost = 0.0;      // USD per participating hour
    double switching_cost = 0.0;  // USD per participation toggle
    double forecast_sigma = 0.0;  // relative std-dev of renewable output error

    bool is_renewable() const { return kind == GencoKind::renewable; }
    bool operator==(const GencoSpec &) const = default;
};

enum class Settlement : int { pay_as_bid = 0, pay_as_clear = 1 };

std::string_view to_string(Settlement s);
Settlement settlement_from_string(std::string_view s);

/// The upper-level action: bid price cap, settlement rule, renewable
/// deviation penalty.
struct MechanismParams {
    double price_cap = 100.0;  // USD/MWh
    Settlement settlement = Settlement::pay_as_bid;
    double penalty_coeff = 0.10;  // fraction of the deviation

    bool operator==(const MechanismParams &) const = default;
};

struct Bid {
    int genco_id = 0;
    bool participate = false;
    double price = 0.0;     // USD/MWh
    double quantity = 0.0;  // MW offered
};

/// Outcome of one hour of day-ahead clearing. Vectors are indexed by genco id.
struct HourlyClearingResult {
    std::vector<double> dispatch;  // MWh
    double clearing_price = 0.0;   // highest accepted bid, 0 when nothing dispatched
    std::vector<double> payments;  // USD
    double unserved = 0.0;         // MWh
    double demand = 0.0;           // MWh

    double served() const { return demand - unserved; }
    bool operator==(const HourlyClearingResult &) const = default;
};

struct MarketMetrics {
    double social_welfare = 0.0;         // USD
    double hhi = 0.0;                    // [0, 10000]
    double renewable_penetration = 0.0;  // [0, 1]
    double supply_demand_ratio = 0.0;

    bool operator==(const MarketMetrics &) const = default;
};

/// Checks the GencoSpec invariants over a whole fleet (ids contiguous from 0).
/// Throws InputError naming the offending entry.
void validate_fleet(const std::vector<GencoSpec> &fleet);

} // namespace qmarket::market
