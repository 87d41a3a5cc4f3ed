#include "qmarket/market/io.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>

#include "qmarket/error.hpp"
#include "qmarket/format.hpp"

namespace qmarket::market {

using nlohmann::json;

void to_json(json &j, const GencoSpec &g) {
    j = json{{"id", g.id},
             {"kind", g.is_renewable() ? "renewable" : "thermal"},
             {"capacity", g.capacity},
             {"marginal_cost", g.marginal_cost},
             {"fixed_cost", g.fixed_cost},
             {"switching_cost", g.switching_cost},
             {"forecast_sigma", g.forecast_sigma}};
}

void from_json(const json &j, GencoSpec &g) {
    static const char *known[] = {"id", "kind", "capacity", "marginal_cost",
                                  "fixed_cost", "switching_cost", "forecast_sigma"};
    for (const auto &[key, _] : j.items()) {
        if (std::find(std::begin(known), std::end(known), key) == std::end(known))
            throw InputError("unknown genco field '" + key + "'");
    }
    g.id = j.at("id").get<int>();
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "thermal")
        g.kind = GencoKind::thermal;
    else if (kind == "renewable")
        g.kind = GencoKind::renewable;
    else
        throw InputError("genco " + std::to_string(g.id) + ": unknown kind '" + kind + "'");
    g.capacity = j.at("capacity").get<double>();
    g.marginal_cost = j.at("marginal_cost").get<double>();
    g.fixed_cost = j.value("fixed_cost", 0.0);
    g.switching_cost = j.value("switching_cost", 0.0);
    g.forecast_sigma = j.value("forecast_sigma", 0.0);
}

void to_json(json &j, const MechanismParams &m) {
    j = json{{"price_cap", m.price_cap},
             {"settlement", to_string(m.settlement)},
             {"penalty_coeff", m.penalty_coeff}};
}

void from_json(const json &j, MechanismParams &m) {
    for (const auto &[key, _] : j.items()) {
        if (key != "price_cap" && key != "settlement" && key != "penalty_coeff")
            throw InputError("unknown mechanism field '" + key + "'");
    }
    m.price_cap = j.value("price_cap", m.price_cap);
    if (j.contains("settlement"))
        m.settlement = settlement_from_string(j.at("settlement").get<std::string>());
    m.penalty_coeff = j.value("penalty_coeff", m.penalty_coeff);
}

std::vector<GencoSpec> parse_fleet(const json &doc) {
    if (!doc.is_object() || !doc.contains("gencos"))
        throw InputError("dataset must be an object with a 'gencos' array");
    std::vector<GencoSpec> fleet;
    try {
        fleet = doc.at("gencos").get<std::vector<GencoSpec>>();
    } catch (const json::exception &e) {
        throw InputError(std::string("dataset: ") + e.what());
    }
    validate_fleet(fleet);
    return fleet;
}

std::vector<GencoSpec> load_fleet(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in)
        throw InputError("cannot open dataset '" + path.string() + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error &e) {
        throw InputError("dataset '" + path.string() + "': " + e.what());
    }
    return parse_fleet(doc);
}

json fleet_to_json(std::span<const GencoSpec> fleet) {
    json arr = json::array();
    for (const auto &g : fleet)
        arr.push_back(g);
    return json{{"gencos", arr}};
}

void write_clearing_csv(std::ostream &os, std::span<const HourlyClearingResult> results,
                        bool header) {
    if (header)
        os << "hour,genco_id,dispatch,price,payment,unserved\n";
    for (std::size_t h = 0; h < results.size(); ++h) {
        const auto &r = results[h];
        for (std::size_t i = 0; i < r.dispatch.size(); ++i) {
            os << h << ',' << i << ',' << format_double(r.dispatch[i]) << ','
               << format_double(r.clearing_price) << ',' << format_double(r.payments[i])
               << ',' << format_double(r.unserved) << '\n';
        }
    }
}

} // namespace qmarket::market
