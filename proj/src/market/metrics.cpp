#include "qmarket/market/metrics.hpp"

#include <algorithm>

#include "qmarket/error.hpp"

namespace qmarket::market {

double social_welfare(std::span<const HourlyClearingResult> results,
                      std::span<const GencoSpec> fleet, double valuation) {
    if (!(valuation > 0.0))
        throw InputError("consumer valuation must be > 0");
    double sw = 0.0;
    for (const auto &r : results) {
        double cost = 0.0;
        for (std::size_t i = 0; i < r.dispatch.size(); ++i) {
            if (r.dispatch[i] == 0.0)
                continue;
            if (i >= fleet.size())
                throw InputError("dispatch for unknown genco " + std::to_string(i));
            cost += fleet[i].marginal_cost * r.dispatch[i];
        }
        sw += valuation * r.served() - cost;
    }
    return sw;
}

double hhi(std::span<const double> energy_by_firm) {
    double total = 0.0;
    for (double e : energy_by_firm)
        total += e;
    if (total <= 0.0)
        return 10000.0;
    double h = 0.0;
    for (double e : energy_by_firm) {
        const double share = 100.0 * e / total;
        h += share * share;
    }
    return std::min(h, 10000.0);
}

MarketMetrics market_metrics(std::span<const HourlyClearingResult> results,
                             std::span<const GencoSpec> fleet,
                             std::span<const double> offered, double valuation) {
    if (results.empty())
        throw InputError("market_metrics needs at least one hour");
    if (offered.size() != results.size())
        throw InputError("offered capacity series must align with results");

    std::vector<double> energy(fleet.size(), 0.0);
    double ratio_sum = 0.0;
    std::size_t ratio_hours = 0;
    for (std::size_t h = 0; h < results.size(); ++h) {
        const auto &r = results[h];
        for (std::size_t i = 0; i < r.dispatch.size() && i < energy.size(); ++i)
            energy[i] += r.dispatch[i];
        if (r.demand > 0.0) {
            ratio_sum += offered[h] / r.demand;
            ++ratio_hours;
        }
    }

    double total = 0.0, renewable = 0.0;
    for (std::size_t i = 0; i < energy.size(); ++i) {
        total += energy[i];
        if (fleet[i].is_renewable())
            renewable += energy[i];
    }

    MarketMetrics m;
    m.social_welfare = social_welfare(results, fleet, valuation);
    m.hhi = hhi(energy);
    m.renewable_penetration = total > 0.0 ? renewable / total : 0.0;
    m.supply_demand_ratio = ratio_hours > 0 ? ratio_sum / static_cast<double>(ratio_hours) : 0.0;
    return m;
}

} // namespace qmarket::market
