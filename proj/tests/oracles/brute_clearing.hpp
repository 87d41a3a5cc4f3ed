#pragma once
// Exhaustive clearing reference for tiny integer instances: enumerate every
// integer dispatch vector, keep the feasible one that serves the most demand
// at the lowest as-bid cost, and price it under both settlement rules.

#include <cstddef>
#include <map>
#include <vector>

namespace oracle {

struct TinyBid {
    int id = 0;
    bool participate = false;
    int price = 0;
    int quantity = 0;
};

struct BruteResult {
    std::vector<int> dispatch;  // indexed by bid position
    int unserved = 0;
    int clearing_price = 0;
    std::vector<int> pay_as_bid;
    std::vector<int> pay_as_clear;
};

/// All dispatch vectors with 0 <= d[i] <= quantity[i] (0 for opt-outs),
/// bucketed by total energy. Built once per bid set and reused for every
/// demand level.
class DispatchTable {
  public:
    explicit DispatchTable(const std::vector<TinyBid> &bids) : bids_(bids) {
        std::vector<int> d(bids.size(), 0);
        enumerate(0, d);
    }

    BruteResult solve(int demand) const {
        int total_offer = 0;
        for (const auto &b : bids_)
            if (b.participate)
                total_offer += b.quantity;
        const int served = demand < total_offer ? demand : total_offer;

        const std::vector<int> *best = nullptr;
        int best_cost = 0;
        auto it = by_total_.find(served);
        for (const auto &d : it->second) {
            int cost = 0;
            for (std::size_t i = 0; i < d.size(); ++i)
                cost += d[i] * bids_[i].price;
            if (!best || cost < best_cost || (cost == best_cost && prefers(d, *best))) {
                best = &d;
                best_cost = cost;
            }
        }

        BruteResult r;
        r.dispatch = *best;
        r.unserved = demand - served;
        for (std::size_t i = 0; i < r.dispatch.size(); ++i)
            if (r.dispatch[i] > 0 && bids_[i].price > r.clearing_price)
                r.clearing_price = bids_[i].price;
        for (std::size_t i = 0; i < r.dispatch.size(); ++i) {
            r.pay_as_bid.push_back(r.dispatch[i] * bids_[i].price);
            r.pay_as_clear.push_back(r.dispatch[i] * r.clearing_price);
        }
        return r;
    }

  private:
    void enumerate(std::size_t i, std::vector<int> &d) {
        if (i == bids_.size()) {
            int total = 0;
            for (int x : d)
                total += x;
            by_total_[total].push_back(d);
            return;
        }
        const int hi = bids_[i].participate ? bids_[i].quantity : 0;
        for (int x = 0; x <= hi; ++x) {
            d[i] = x;
            enumerate(i + 1, d);
        }
        d[i] = 0;
    }

    // Equal-cost tie-break: among cheapest dispatches, the one that loads
    // units earlier in (price, id) order first. Compares the dispatch vectors
    // lexicographically in that order.
    bool prefers(const std::vector<int> &a, const std::vector<int> &b) const {
        std::vector<std::size_t> order(bids_.size());
        for (std::size_t i = 0; i < order.size(); ++i)
            order[i] = i;
        for (std::size_t i = 0; i < order.size(); ++i)
            for (std::size_t j = i + 1; j < order.size(); ++j) {
                const auto &x = bids_[order[i]], &y = bids_[order[j]];
                if (y.price < x.price || (y.price == x.price && y.id < x.id))
                    std::swap(order[i], order[j]);
            }
        for (std::size_t k : order)
            if (a[k] != b[k])
                return a[k] > b[k];
        return false;
    }

    std::vector<TinyBid> bids_;
    std::map<int, std::vector<std::vector<int>>> by_total_;
};

} // namespace oracle
