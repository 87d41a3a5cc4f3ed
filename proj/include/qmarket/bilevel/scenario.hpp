#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

#include "qmarket/market/types.hpp"

namespace qmarket::bilevel {

inline constexpr std::size_t kHoursPerDay = 24;

/// Hourly demand (MWh) for every day of a month, day-major.
class DemandProfile {
  public:
    DemandProfile() = default;
    /// Throws InputError unless values.size() == days * 24 and all values are
    /// finite and non-negative.
    DemandProfile(std::size_t days, std::vector<double> values);

    std::size_t days() const { return days_; }
    double at(std::size_t day, std::size_t hour) const { return values_[day * kHoursPerDay + hour]; }
    double peak() const;
    double total() const;
    const std::vector<double> &values() const { return values_; }

    /// First `days` days of this profile.
    DemandProfile truncated(std::size_t days) const;

    bool operator==(const DemandProfile &) const = default;

  private:
    std::size_t days_ = 0;
    std::vector<double> values_;
};

/// CSV with one row per day and 24 comma-separated hourly values. Lines
/// starting with '#' and a non-numeric header row are skipped.
DemandProfile load_demand_csv(const std::filesystem::path &path);

/// Bundled synthetic fleet: four thermal units (40/50/60/80 MW at
/// 18/22/28/35 USD/MWh) and two renewables (40/50 MW, zero marginal cost,
/// forecast sigma 0.15).
std::vector<market::GencoSpec> default_fleet();

/// Sinusoidal daily shape peaking at `peak_fraction` of total fleet capacity
/// mid-afternoon and bottoming out at half the peak before dawn; every day
/// identical.
DemandProfile default_demand(const std::vector<market::GencoSpec> &fleet, std::size_t days,
                             double peak_fraction = 0.8);

} // namespace qmarket::bilevel
