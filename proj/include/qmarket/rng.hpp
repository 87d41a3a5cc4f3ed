#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace qmarket {

/// Mixes a master seed with a stream name into an independent 64-bit seed.
/// The mapping is fixed: changing it changes every recorded experiment.
std::uint64_t derive_seed(std::uint64_t master, std::string_view stream_name);

/// A named, explicitly-passed source of randomness. Every stochastic
/// operation takes one of these by reference; nothing draws from global
/// state.
class RngStream {
  public:
    explicit RngStream(std::uint64_t seed = 0) : engine_(seed) {}
    RngStream(std::uint64_t master, std::string_view name)
        : engine_(derive_seed(master, name)) {}

    double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
    double normal(double mean, double stddev) {
        return std::normal_distribution<double>(mean, stddev)(engine_);
    }
    /// Uniform integer in [0, n).
    std::size_t index(std::size_t n) {
        return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
    }
    bool bernoulli(double p) { return std::bernoulli_distribution(p)(engine_); }

    std::mt19937_64 &engine() { return engine_; }

  private:
    std::mt19937_64 engine_;
};

} // namespace qmarket
