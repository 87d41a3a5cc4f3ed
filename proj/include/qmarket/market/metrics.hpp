#pragma once

#include <span>
#include <vector>

#include "qmarket/market/types.hpp"

namespace qmarket::market {

/// Consumer value of served energy minus production cost, summed over hours.
double social_welfare(std::span<const HourlyClearingResult> results,
                      std::span<const GencoSpec> fleet, double valuation);

/// Herfindahl-Hirschman index over per-firm energy. All-zero energy is
/// reported as 10000 (degenerate monopoly).
double hhi(std::span<const double> energy_by_firm);

/// Aggregates a month of clearing results. `offered` holds the total offered
/// MW for each hour, aligned with `results`.
MarketMetrics market_metrics(std::span<const HourlyClearingResult> results,
                             std::span<const GencoSpec> fleet,
                             std::span<const double> offered, double valuation);

} // namespace qmarket::market
