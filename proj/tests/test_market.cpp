#include <doctest.h>

#include <cmath>
#include <numeric>
#include <sstream>

#include "oracles/brute_clearing.hpp"
#include "qmarket/error.hpp"
#include "qmarket/market/clearing.hpp"
#include "qmarket/market/io.hpp"
#include "qmarket/market/metrics.hpp"

using namespace qmarket;
using namespace qmarket::market;

namespace {

Bid bid(int id, double price, double qty) { return {id, true, price, qty}; }

MechanismParams mech(Settlement rule, double cap = 100.0, double penalty = 0.1) {
    return {cap, rule, penalty};
}

GencoSpec thermal(int id, double cap, double mc, double fixed = 0.0, double sw = 0.0) {
    return {id, GencoKind::thermal, cap, mc, fixed, sw, 0.0};
}

GencoSpec renewable(int id, double cap, double sigma) {
    return {id, GencoKind::renewable, cap, 0.0, 0.0, 0.0, sigma};
}

} // namespace

TEST_CASE("three-bid merit order under pay-as-clear") {
    const std::vector<Bid> bids{bid(0, 10, 50), bid(1, 20, 50), bid(2, 30, 50)};
    const auto r = clear_hour(bids, 80, mech(Settlement::pay_as_clear));
    CHECK(r.dispatch == std::vector<double>{50, 30, 0});
    CHECK(r.clearing_price == 20);
    CHECK(r.payments == std::vector<double>{1000, 600, 0});
    CHECK(r.unserved == 0);
}

TEST_CASE("three-bid merit order under pay-as-bid") {
    const std::vector<Bid> bids{bid(0, 10, 50), bid(1, 20, 50), bid(2, 30, 50)};
    const auto r = clear_hour(bids, 80, mech(Settlement::pay_as_bid));
    CHECK(r.payments == std::vector<double>{500, 600, 0});
}

TEST_CASE("zero demand dispatches nothing") {
    const std::vector<Bid> bids{bid(0, 10, 50), bid(1, 20, 50)};
    const auto r = clear_hour(bids, 0, mech(Settlement::pay_as_clear));
    CHECK(r.dispatch == std::vector<double>{0, 0});
    CHECK(r.clearing_price == 0);
    CHECK(r.unserved == 0);
}

TEST_CASE("shortfall is recorded as unserved") {
    const std::vector<Bid> bids{bid(0, 10, 50), bid(1, 20, 100)};
    const auto r = clear_hour(bids, 200, mech(Settlement::pay_as_bid));
    CHECK(r.dispatch == std::vector<double>{50, 100});
    CHECK(r.unserved == 50);
    CHECK(r.served() == 150);
}

TEST_CASE("equal prices fill the lower genco id first") {
    const std::vector<Bid> bids{bid(2, 20, 50), bid(0, 20, 50), bid(1, 20, 50)};
    const auto r = clear_hour(bids, 70, mech(Settlement::pay_as_bid));
    CHECK(r.dispatch == std::vector<double>{50, 20, 0});
}

TEST_CASE("opt-outs are ignored") {
    std::vector<Bid> bids{bid(0, 10, 50), bid(1, 20, 50)};
    bids[0].participate = false;
    const auto r = clear_hour(bids, 30, mech(Settlement::pay_as_clear));
    CHECK(r.dispatch == std::vector<double>{0, 30});
    CHECK(r.clearing_price == 20);
}

TEST_CASE("bid above the cap names the genco") {
    const std::vector<Bid> bids{bid(0, 10, 50), bid(3, 120, 50)};
    try {
        (void)clear_hour(bids, 10, mech(Settlement::pay_as_bid, 100));
        FAIL("expected a validation error");
    } catch (const ValidationError &e) {
        CHECK(e.genco_id() == 3);
    }
}

TEST_CASE("invalid inputs") {
    const std::vector<Bid> bids{bid(0, 10, 50)};
    CHECK_THROWS_AS(clear_hour(bids, -1, mech(Settlement::pay_as_bid)), InputError);
    const std::vector<Bid> dup{bid(0, 10, 50), bid(0, 20, 50)};
    CHECK_THROWS_AS(clear_hour(dup, 10, mech(Settlement::pay_as_bid)), ValidationError);
    const std::vector<Bid> neg{bid(0, -1, 50)};
    CHECK_THROWS_AS(clear_hour(neg, 10, mech(Settlement::pay_as_bid)), ValidationError);
}

TEST_CASE("clearing invariants on random instances") {
    RngStream rng(11);
    for (int trial = 0; trial < 2000; ++trial) {
        const std::size_t n = 1 + rng.index(6);
        const double cap = 50 + 450 * rng.uniform();
        std::vector<Bid> bids;
        for (std::size_t i = 0; i < n; ++i)
            bids.push_back({static_cast<int>(i), rng.uniform() < 0.8, cap * rng.uniform(),
                            100 * rng.uniform()});
        const double demand = 300 * rng.uniform();
        const auto bid_r = clear_hour(bids, demand, mech(Settlement::pay_as_bid, cap));
        const auto clr_r = clear_hour(bids, demand, mech(Settlement::pay_as_clear, cap));

        const double total = std::accumulate(bid_r.dispatch.begin(), bid_r.dispatch.end(), 0.0);
        CHECK(std::abs(total + bid_r.unserved - demand) <= 1e-9);
        CHECK(bid_r.dispatch == clr_r.dispatch);
        CHECK(bid_r.clearing_price <= cap);

        double as_bid = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            CHECK(bid_r.dispatch[i] <= bids[i].quantity);
            CHECK(bid_r.payments[i] >= 0.0);
            if (bid_r.dispatch[i] > 0) {
                CHECK(bids[i].participate);
                CHECK(bids[i].price <= bid_r.clearing_price);
            }
            // Settlement dominance.
            CHECK(clr_r.payments[i] >= bid_r.payments[i]);
            as_bid += bids[i].price * bid_r.dispatch[i];
        }
        // Conservation under both rules.
        CHECK(std::accumulate(bid_r.payments.begin(), bid_r.payments.end(), 0.0) ==
              doctest::Approx(as_bid).epsilon(1e-12));
        CHECK(std::accumulate(clr_r.payments.begin(), clr_r.payments.end(), 0.0) ==
              doctest::Approx(clr_r.clearing_price * total).epsilon(1e-12));
    }
}

TEST_CASE("brute-force oracle on a sample of small instances") {
    // The exhaustive grid lives in the acceptance suite; this is a quick slice.
    RngStream rng(5);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = 1 + rng.index(3);
        std::vector<oracle::TinyBid> tiny;
        std::vector<Bid> bids;
        for (std::size_t i = 0; i < n; ++i) {
            const bool part = rng.uniform() < 0.85;
            const int price = 10 * static_cast<int>(1 + rng.index(3));
            const int qty = static_cast<int>(rng.index(6));
            tiny.push_back({static_cast<int>(i), part, price, qty});
            bids.push_back({static_cast<int>(i), part, double(price), double(qty)});
        }
        const int demand = static_cast<int>(rng.index(21));
        const auto expect = oracle::DispatchTable(tiny).solve(demand);
        const auto r = clear_hour(bids, demand, mech(Settlement::pay_as_bid));
        for (std::size_t i = 0; i < n; ++i)
            CHECK(r.dispatch[i] == expect.dispatch[i]);
        CHECK(r.unserved == expect.unserved);
    }
}

TEST_CASE("thermal output passes through without drawing") {
    RngStream a(3), b(3);
    CHECK(realize_renewable(thermal(0, 50, 10), 40, a) == 40);
    CHECK(a.uniform() == b.uniform());
}

TEST_CASE("renewable realization") {
    RngStream rng(9);
    const auto r = renewable(4, 50, 0.1);
    CHECK(realize_renewable(r, 0, rng) == 0);
    RngStream x(77), y(77);
    for (int i = 0; i < 1000; ++i) {
        const double v = realize_renewable(r, 40, x);
        CHECK(v >= 0.0);
        CHECK(v <= 80.0);
        CHECK(v == realize_renewable(r, 40, y));
    }
    // Truncation holds for a wide error distribution too.
    const auto wide = renewable(4, 50, 3.0);
    for (int i = 0; i < 1000; ++i) {
        const double v = realize_renewable(wide, 10, x);
        CHECK(v >= 0.0);
        CHECK(v <= 20.0);
    }
}

TEST_CASE("genco reward examples") {
    SUBCASE("thermal pay-as-bid") {
        const auto spec = thermal(0, 50, 15, 100, 0);
        const Bid b = bid(0, 20, 50);
        HourlyClearingResult r;
        r.dispatch = {30};
        r.payments = {600};
        r.clearing_price = 20;
        r.demand = 30;
        CHECK(genco_reward(spec, b, r, 30, true, mech(Settlement::pay_as_bid)) == 50);
    }
    SUBCASE("opting out after participating pays the switch") {
        const auto spec = thermal(0, 50, 15, 100, 50);
        Bid b = bid(0, 20, 50);
        b.participate = false;
        HourlyClearingResult r;
        r.dispatch = {0};
        r.payments = {0};
        CHECK(genco_reward(spec, b, r, 0, true, mech(Settlement::pay_as_bid)) == -50);
    }
    SUBCASE("renewable deviation penalty at the clearing price") {
        const auto spec = renewable(0, 50, 0.1);
        const Bid b = bid(0, 20, 50);
        HourlyClearingResult r;
        r.dispatch = {40};
        r.payments = {800};
        r.clearing_price = 20;
        CHECK(genco_reward(spec, b, r, 36, true, mech(Settlement::pay_as_clear, 100, 0.10)) ==
              doctest::Approx(792).epsilon(1e-12));
    }
    SUBCASE("pay-as-bid penalty uses the own bid") {
        const auto spec = renewable(0, 50, 0.1);
        const Bid b = bid(0, 10, 50);
        HourlyClearingResult r;
        r.dispatch = {40};
        r.payments = {400};
        r.clearing_price = 30;
        CHECK(genco_reward(spec, b, r, 44, true, mech(Settlement::pay_as_bid, 100, 0.5)) ==
              doctest::Approx(400 - 0.5 * 4 * 10).epsilon(1e-12));
    }
    SUBCASE("missing genco") {
        HourlyClearingResult r;
        r.dispatch = {1};
        r.payments = {1};
        CHECK_THROWS_AS(genco_reward(thermal(3, 10, 1), bid(3, 1, 1), r, 1, true,
                                     mech(Settlement::pay_as_bid)),
                        InputError);
    }
}

TEST_CASE("social welfare") {
    const std::vector<GencoSpec> fleet{thermal(0, 100, 10), thermal(1, 100, 15)};
    HourlyClearingResult h;
    h.dispatch = {50, 30};
    h.payments = {0, 0};
    h.demand = 90;
    h.unserved = 10;
    const std::vector<HourlyClearingResult> month{h};
    // Only served energy earns value: 100 * 80 - (50 * 10 + 30 * 15).
    CHECK(social_welfare(month, fleet, 100) == doctest::Approx(8000 - 950));

    HourlyClearingResult one;
    one.dispatch = {20, 60};  // production cost 200 + 900
    one.demand = 80;
    one.unserved = 0;
    const std::vector<HourlyClearingResult> m1{one};
    CHECK(social_welfare(m1, fleet, 100) == doctest::Approx(6900));

    HourlyClearingResult empty;
    empty.dispatch = {0, 0};
    empty.demand = 0;
    const std::vector<HourlyClearingResult> m0{empty};
    CHECK(social_welfare(m0, fleet, 100) == 0);

    // Doubling V doubles only the consumer-value term.
    const double a = social_welfare(m1, fleet, 100), b = social_welfare(m1, fleet, 200);
    CHECK(b - a == doctest::Approx(100 * 80));
}

TEST_CASE("hhi") {
    const std::vector<double> mono{0, 120, 0};
    CHECK(hhi(mono) == doctest::Approx(10000));
    const std::vector<double> half{50, 50};
    CHECK(hhi(half) == doctest::Approx(5000));
    const std::vector<double> sixty{60, 40};
    CHECK(hhi(sixty) == doctest::Approx(5200));
    const std::vector<double> none{0, 0};
    CHECK(hhi(none) == 10000);

    RngStream rng(2);
    for (int i = 0; i < 500; ++i) {
        std::vector<double> e(1 + rng.index(6));
        for (auto &x : e)
            x = rng.uniform() * 100 + 1e-3;
        const double h = hhi(e);
        CHECK(h <= 10000 + 1e-9);
        CHECK(h >= 10000.0 / e.size() - 1e-9);
    }
}

TEST_CASE("market metrics") {
    const std::vector<GencoSpec> fleet{thermal(0, 100, 10), renewable(1, 100, 0.1)};
    HourlyClearingResult a, b, c;
    a.dispatch = {60, 40};
    a.demand = 100;
    b.dispatch = {60, 40};
    b.demand = 100;
    c.dispatch = {0, 0};
    c.demand = 0;
    const std::vector<HourlyClearingResult> month{a, b, c};
    const std::vector<double> offered{200, 100, 50};
    const auto m = market_metrics(month, fleet, offered, 100);
    CHECK(m.hhi == doctest::Approx(5200));
    CHECK(m.renewable_penetration == doctest::Approx(0.4));
    CHECK(m.supply_demand_ratio == doctest::Approx(1.5));  // the demand-0 hour is skipped
    CHECK(m.social_welfare == doctest::Approx(2 * (100 * 100 - 600)));

    const std::vector<HourlyClearingResult> dark{c};
    const std::vector<double> off1{0};
    const auto d = market_metrics(dark, fleet, off1, 100);
    CHECK(d.renewable_penetration == 0);
    CHECK(d.hhi == 10000);

    const std::vector<double> wrong{1, 2};
    CHECK_THROWS_AS(market_metrics(month, fleet, wrong, 100), InputError);
}

TEST_CASE("fleet validation and dataset round trip") {
    std::vector<GencoSpec> fleet{thermal(0, 40, 18, 50, 100), renewable(1, 50, 0.15)};
    CHECK_NOTHROW(validate_fleet(fleet));
    const auto back = parse_fleet(fleet_to_json(fleet));
    CHECK(back == fleet);

    auto bad = fleet;
    bad[1].forecast_sigma = 0;
    CHECK_THROWS_AS(validate_fleet(bad), InputError);
    bad = fleet;
    bad[0].forecast_sigma = 0.1;
    CHECK_THROWS_AS(validate_fleet(bad), InputError);
    bad = fleet;
    bad[1].id = 2;
    CHECK_THROWS_AS(validate_fleet(bad), InputError);
    bad = fleet;
    bad[0].capacity = 0;
    CHECK_THROWS_AS(validate_fleet(bad), InputError);

    auto doc = fleet_to_json(fleet);
    doc["gencos"][0]["colour"] = "red";
    CHECK_THROWS_AS(parse_fleet(doc), InputError);
}

TEST_CASE("clearing csv") {
    HourlyClearingResult r;
    r.dispatch = {50, 30};
    r.payments = {1000, 600};
    r.clearing_price = 20;
    r.demand = 80;
    const std::vector<HourlyClearingResult> rs{r};
    std::ostringstream os;
    write_clearing_csv(os, rs);
    CHECK(os.str() == "hour,genco_id,dispatch,price,payment,unserved\n"
                      "0,0,50,20,1000,0\n"
                      "0,1,30,20,600,0\n");
}

TEST_CASE("settlement names") {
    CHECK(settlement_from_string("pay_as_bid") == Settlement::pay_as_bid);
    CHECK(settlement_from_string(to_string(Settlement::pay_as_clear)) == Settlement::pay_as_clear);
    CHECK_THROWS_AS(settlement_from_string("vickrey"), InputError);
}
