#include "qmarket/market/clearing.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "qmarket/error.hpp"

namespace qmarket::market {

void validate_bids(std::span<const Bid> bids, const MechanismParams &mech) {
    std::vector<int> seen;
    seen.reserve(bids.size());
    for (const auto &b : bids) {
        if (b.genco_id < 0)
            throw ValidationError(b.genco_id, "negative genco id");
        if (std::find(seen.begin(), seen.end(), b.genco_id) != seen.end())
            throw ValidationError(b.genco_id, "duplicate bid");
        seen.push_back(b.genco_id);
        if (!b.participate)
            continue;
        if (!std::isfinite(b.price) || b.price < 0.0)
            throw ValidationError(b.genco_id, "bid price must be finite and >= 0");
        if (b.price > mech.price_cap)
            throw ValidationError(b.genco_id, "bid price " + std::to_string(b.price) +
                                                  " exceeds price cap " +
                                                  std::to_string(mech.price_cap));
        if (!std::isfinite(b.quantity) || b.quantity < 0.0)
            throw ValidationError(b.genco_id, "bid quantity must be finite and >= 0");
    }
}

HourlyClearingResult clear_hour(std::span<const Bid> bids, double demand,
                                const MechanismParams &mech) {
    if (!std::isfinite(demand) || demand < 0.0)
        throw InputError("demand must be finite and >= 0");
    validate_bids(bids, mech);

    int max_id = -1;
    for (const auto &b : bids)
        max_id = std::max(max_id, b.genco_id);

    HourlyClearingResult out;
    out.demand = demand;
    out.dispatch.assign(static_cast<std::size_t>(max_id + 1), 0.0);
    out.payments.assign(static_cast<std::size_t>(max_id + 1), 0.0);

    std::vector<const Bid *> order;
    for (const auto &b : bids)
        if (b.participate)
            order.push_back(&b);
    std::sort(order.begin(), order.end(), [](const Bid *a, const Bid *b) {
        return a->price != b->price ? a->price < b->price : a->genco_id < b->genco_id;
    });

    double remaining = demand;
    for (const Bid *b : order) {
        if (remaining <= 0.0)
            break;
        const double q = std::min(b->quantity, remaining);
        if (q <= 0.0)
            continue;
        out.dispatch[static_cast<std::size_t>(b->genco_id)] = q;
        out.clearing_price = b->price;  // ascending order: last accepted is highest
        remaining -= q;
    }
    // Served energy is the sum actually dispatched, so the balance holds
    // exactly rather than through the running subtraction.
    const double served = std::accumulate(out.dispatch.begin(), out.dispatch.end(), 0.0);
    out.unserved = demand - served;

    for (const Bid *b : order) {
        const auto i = static_cast<std::size_t>(b->genco_id);
        const double price =
            mech.settlement == Settlement::pay_as_clear ? out.clearing_price : b->price;
        out.payments[i] = price * out.dispatch[i];
    }
    return out;
}

double realize_renewable(const GencoSpec &spec, double scheduled, RngStream &rng) {
    if (!spec.is_renewable() || spec.forecast_sigma == 0.0)
        return scheduled;
    // Rejection sampling keeps the exact truncated density; bounded so an
    // absurd sigma cannot spin forever.
    double e = 0.0;
    for (int attempt = 0; attempt < 1000; ++attempt) {
        e = rng.normal(0.0, spec.forecast_sigma);
        if (e >= -1.0 && e <= 1.0)
            break;
    }
    e = std::clamp(e, -1.0, 1.0);
    return scheduled * (1.0 + e);
}

double settlement_price(const Bid &bid, const HourlyClearingResult &result,
                        Settlement rule) {
    return rule == Settlement::pay_as_clear ? result.clearing_price : bid.price;
}

double genco_reward(const GencoSpec &spec, const Bid &bid,
                    const HourlyClearingResult &result, double realized,
                    bool prev_participation, const MechanismParams &mech) {
    const auto i = static_cast<std::size_t>(spec.id);
    if (i >= result.dispatch.size())
        throw InputError("clearing result does not contain genco " + std::to_string(spec.id));
    const double dispatched = result.dispatch[i];
    double reward = result.payments[i] - spec.marginal_cost * dispatched;
    if (bid.participate)
        reward -= spec.fixed_cost;
    if (bid.participate != prev_participation)
        reward -= spec.switching_cost;
    if (spec.is_renewable() && bid.participate) {
        reward -= mech.penalty_coeff * std::abs(realized - dispatched) *
                  settlement_price(bid, result, mech.settlement);
    }
    return reward;
}

} // namespace qmarket::market
