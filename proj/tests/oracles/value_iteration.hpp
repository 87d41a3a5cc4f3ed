#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace oracle {

/// Deterministic finite MDP: next[s][a] and reward[s][a].
struct FiniteMdp {
    std::vector<std::vector<std::size_t>> next;
    std::vector<std::vector<double>> reward;
    double gamma = 0.9;
};

/// Q* by value iteration to a fixed point.
inline std::vector<std::vector<double>> value_iteration(const FiniteMdp &m, double tol = 1e-13) {
    const std::size_t ns = m.next.size();
    std::vector<double> v(ns, 0.0);
    std::vector<std::vector<double>> q(ns);
    for (int iter = 0; iter < 100000; ++iter) {
        double delta = 0.0;
        for (std::size_t s = 0; s < ns; ++s) {
            q[s].assign(m.next[s].size(), 0.0);
            for (std::size_t a = 0; a < m.next[s].size(); ++a)
                q[s][a] = m.reward[s][a] + m.gamma * v[m.next[s][a]];
        }
        for (std::size_t s = 0; s < ns; ++s) {
            const double nv = *std::max_element(q[s].begin(), q[s].end());
            delta = std::max(delta, std::abs(nv - v[s]));
            v[s] = nv;
        }
        if (delta < tol)
            break;
    }
    return q;
}

inline std::vector<std::size_t> greedy_policy(const std::vector<std::vector<double>> &q) {
    std::vector<std::size_t> pi;
    for (const auto &row : q)
        pi.push_back(static_cast<std::size_t>(std::max_element(row.begin(), row.end()) -
                                              row.begin()));
    return pi;
}

} // namespace oracle
