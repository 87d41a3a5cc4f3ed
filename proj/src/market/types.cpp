#include "qmarket/market/types.hpp"

#include <string>

#include "qmarket/error.hpp"

namespace qmarket::market {

std::string_view to_string(Settlement s) {
    return s == Settlement::pay_as_bid ? "pay_as_bid" : "pay_as_clear";
}

Settlement settlement_from_string(std::string_view s) {
    if (s == "pay_as_bid")
        return Settlement::pay_as_bid;
    if (s == "pay_as_clear")
        return Settlement::pay_as_clear;
    throw InputError("unknown settlement rule '" + std::string(s) + "'");
}

void validate_fleet(const std::vector<GencoSpec> &fleet) {
    if (fleet.empty())
        throw InputError("fleet is empty");
    for (std::size_t i = 0; i < fleet.size(); ++i) {
        const auto &g = fleet[i];
        const std::string where = "genco[" + std::to_string(i) + "]: ";
        if (g.id != static_cast<int>(i))
            throw InputError(where + "ids must be unique and contiguous from 0");
        if (!(g.capacity > 0.0))
            throw InputError(where + "capacity must be > 0");
        if (!(g.marginal_cost >= 0.0))
            throw InputError(where + "marginal_cost must be >= 0");
        if (!(g.fixed_cost >= 0.0) || !(g.switching_cost >= 0.0))
            throw InputError(where + "fixed_cost and switching_cost must be >= 0");
        if (!(g.forecast_sigma >= 0.0))
            throw InputError(where + "forecast_sigma must be >= 0");
        if ((g.forecast_sigma == 0.0) != (g.kind == GencoKind::thermal))
            throw InputError(where + "forecast_sigma must be 0 exactly for thermal units");
    }
}

} // namespace qmarket::market
