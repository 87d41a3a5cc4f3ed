#include "qmarket/bilevel/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>
#include <string>

#include "qmarket/error.hpp"

namespace qmarket::bilevel {

DemandProfile::DemandProfile(std::size_t days, std::vector<double> values)
    : days_(days), values_(std::move(values)) {
    if (days_ == 0)
        throw InputError("demand profile needs at least one day");
    if (values_.size() != days_ * kHoursPerDay)
        throw InputError("demand profile must have 24 values per day");
    for (double v : values_)
        if (!std::isfinite(v) || v < 0.0)
            throw InputError("demand values must be finite and >= 0");
}

double DemandProfile::peak() const {
    return values_.empty() ? 0.0 : *std::max_element(values_.begin(), values_.end());
}

double DemandProfile::total() const {
    return std::accumulate(values_.begin(), values_.end(), 0.0);
}

DemandProfile DemandProfile::truncated(std::size_t days) const {
    if (days == 0 || days > days_)
        throw InputError("cannot truncate demand profile to " + std::to_string(days) + " days");
    return DemandProfile(days, std::vector<double>(values_.begin(),
                                                   values_.begin() + static_cast<std::ptrdiff_t>(days * kHoursPerDay)));
}

DemandProfile load_demand_csv(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in)
        throw InputError("cannot open demand profile '" + path.string() + "'");
    std::vector<double> values;
    std::size_t days = 0;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#')
            continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        bool numeric = true;
        while (std::getline(ss, cell, ',')) {
            try {
                std::size_t used = 0;
                row.push_back(std::stod(cell, &used));
            } catch (const std::exception &) {
                numeric = false;
                break;
            }
        }
        if (!numeric) {
            if (days == 0 && values.empty())
                continue;  // header
            throw InputError(path.string() + ":" + std::to_string(line_no) +
                             ": non-numeric demand value");
        }
        if (row.size() != kHoursPerDay)
            throw InputError(path.string() + ":" + std::to_string(line_no) +
                             ": expected 24 hourly values, got " + std::to_string(row.size()));
        values.insert(values.end(), row.begin(), row.end());
        ++days;
    }
    return DemandProfile(days, std::move(values));
}

std::vector<market::GencoSpec> default_fleet() {
    using market::GencoKind;
    return {
        {0, GencoKind::thermal, 40.0, 18.0, 50.0, 100.0, 0.0},
        {1, GencoKind::thermal, 50.0, 22.0, 60.0, 120.0, 0.0},
        {2, GencoKind::thermal, 60.0, 28.0, 70.0, 140.0, 0.0},
        {3, GencoKind::thermal, 80.0, 35.0, 90.0, 180.0, 0.0},
        {4, GencoKind::renewable, 40.0, 0.0, 10.0, 20.0, 0.15},
        {5, GencoKind::renewable, 50.0, 0.0, 10.0, 20.0, 0.15},
    };
}

DemandProfile default_demand(const std::vector<market::GencoSpec> &fleet, std::size_t days,
                             double peak_fraction) {
    double capacity = 0.0;
    for (const auto &g : fleet)
        capacity += g.capacity;
    const double peak = peak_fraction * capacity;
    std::vector<double> values;
    values.reserve(days * kHoursPerDay);
    for (std::size_t d = 0; d < days; ++d) {
        for (std::size_t h = 0; h < kHoursPerDay; ++h) {
            // Maximum at 15:00, minimum at 03:00.
            const double phase = 2.0 * std::numbers::pi * (static_cast<double>(h) - 9.0) / 24.0;
            values.push_back(peak * (0.75 + 0.25 * std::sin(phase)));
        }
    }
    return DemandProfile(days, std::move(values));
}

} // namespace qmarket::bilevel
