#pragma once

#include <span>
#include <vector>

#include "qmarket/market/types.hpp"
#include "qmarket/rng.hpp"

namespace qmarket::market {

/// Checks every participating bid against the mechanism. Throws
/// ValidationError naming the first offending genco.
void validate_bids(std::span<const Bid> bids, const MechanismParams &mech);

/// Single-node merit-order clearing.
///
/// Participating bids are sorted by (price, genco_id) and filled in order
/// until demand is met; the marginal unit is dispatched partially. Under
/// pay-as-bid each unit is paid its own price, under pay-as-clear every
/// dispatched unit is paid the highest accepted price. Bid genco ids must be
/// unique; the result vectors are sized to the largest id + 1.
HourlyClearingResult clear_hour(std::span<const Bid> bids, double demand,
                                const MechanismParams &mech);

/// Realized output of a scheduled renewable unit: scheduled * (1 + e) with
/// e ~ N(0, sigma^2) truncated to [-1, 1]. Thermal units pass through and do
/// not consume randomness.
double realize_renewable(const GencoSpec &spec, double scheduled, RngStream &rng);

/// Price at which a unit's deviation is monetized and its energy is settled.
double settlement_price(const Bid &bid, const HourlyClearingResult &result,
                        Settlement rule);

/// Hourly profit of one GENCO, net of fixed, switching and (renewables only)
/// deviation penalty costs.
double genco_reward(const GencoSpec &spec, const Bid &bid,
                    const HourlyClearingResult &result, double realized,
                    bool prev_participation, const MechanismParams &mech);

} // namespace qmarket::market
