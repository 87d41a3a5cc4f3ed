#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "qmarket/app/compare.hpp"
#include "qmarket/app/config.hpp"
#include "qmarket/app/report.hpp"
#include "qmarket/market/io.hpp"
#include "support/stub_lower.hpp"

using namespace qmarket;
using namespace qmarket::app;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string &name) {
    const auto dir = fs::temp_directory_path() / ("qmarket_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string field_of(const std::string &text) {
    try {
        parse_config_text(text);
    } catch (const ConfigError &e) {
        return e.field();
    }
    return "<accepted>";
}

bilevel::ExperimentRecord stub_record(std::uint64_t seed) {
    support::QuadraticLowerLevel stub;
    bilevel::ExperimentSettings s;
    s.seed = seed;
    s.stop.max_steps = 6;
    auto rec = bilevel::run_experiment(stub, s);
    // The stub reports no agents; add a little telemetry so agent files exist.
    for (std::size_t m = 0; m < rec.months.size(); ++m) {
        rec.months[m].agent_rewards = {1.0 * m, 2.0};
        rec.months[m].telemetry = {{m, 0, 0.125, 0.5, 3.25}, {m, 1, 0.0, 0.5, -1.0 / 3.0}};
    }
    return rec;
}

} // namespace

TEST_CASE("minimal config is fully defaulted") {
    const auto c = parse_config_text(R"({"backend": "mlp"})");
    ExperimentConfig expected;
    expected.lower.backend = bilevel::Backend::mlp;
    CHECK(c == expected);
    CHECK(c.settings.initial_mechanism.price_cap == 100.0);
    CHECK(c.settings.initial_mechanism.settlement == market::Settlement::pay_as_bid);
    CHECK(c.settings.initial_mechanism.penalty_coeff == doctest::Approx(0.10));
    CHECK(c.settings.stop.threshold == doctest::Approx(0.2));
    CHECK(c.settings.stop.window == 3);
}

TEST_CASE("validation errors name the field") {
    CHECK(field_of(R"({"ppo": {"penalty": {"lo": 0.1, "hi": 1.5}}})") == "ppo.penalty");
    CHECK(field_of(R"({"ppo": {"penalty": {"lo": -0.1, "hi": 0.5}}})") == "ppo.penalty");
    CHECK(field_of(R"({"agent": {"learning_rate": 0}})") == "agent.learning_rate");
    CHECK(field_of(R"({"days": 0})") == "days");
    CHECK(field_of(R"({"backend": "tpu"})") == "backend");
    CHECK(field_of(R"({"vqc": {"n_qubits": 4}})") == "vqc.n_qubits");
    CHECK(field_of(R"({"agent": {"gamma": "high"}})") == "agent.gamma");
    CHECK(field_of(R"({"initial_mechanism": {"price_cap": 900, "settlement": "pay_as_bid",
                     "penalty_coeff": 0.1}})") == "initial_mechanism.price_cap");
}

TEST_CASE("unknown keys are rejected with their path") {
    CHECK(field_of(R"({"agnet": {}})") == "agnet");
    CHECK(field_of(R"({"ppo": {"clip": 0.2, "clpi": 0.3}})") == "ppo.clpi");
}

TEST_CASE("syntax errors carry line context") {
    try {
        parse_config_text("{\n  \"backend\": \"vqc\",\n  \"seed\": ,\n}");
        FAIL("accepted malformed JSON");
    } catch (const ConfigError &e) {
        const std::string what = e.what();
        CHECK(what.find("line 3") != std::string::npos);
        CHECK(what.find("\"seed\": ,") != std::string::npos);
    }
}

TEST_CASE("config echo round trip") {
    auto c = parse_config_text(R"({"backend": "vqc", "seed": 99, "days": 4,
        "ppo": {"actor_lr": 0.02, "price_cap": {"lo": 60, "hi": 400}},
        "reward_weights": {"w1": 0.6, "w2": 0.4, "sw_normalizer": 123456},
        "vqc": {"n_layers": 3, "tie_ry_rz": false}, "write_hourly": true})");
    const auto echo = config_to_json(c).dump();
    CHECK(parse_config_text(echo) == c);
    CHECK(parse_config(config_to_json(ExperimentConfig{})) == ExperimentConfig{});
}

TEST_CASE("relative dataset paths resolve against the config directory") {
    const auto dir = scratch_dir("paths");
    {
        std::ofstream os(dir / "cfg.json");
        os << R"({"fleet": "fleet.json", "demand": null})";
    }
    std::ofstream(dir / "fleet.json") << market::fleet_to_json(bilevel::default_fleet()).dump();
    const auto c = load_config(dir / "cfg.json");
    CHECK(fs::path(c.fleet_path) == dir / "fleet.json");
    CHECK(c.demand_path.empty());
    const auto s = load_scenario(c);
    CHECK(s.fleet == bilevel::default_fleet());
    CHECK(s.demand.days() == c.days);

    auto bad = c;
    bad.demand_path = (dir / "missing.csv").string();
    try {
        load_scenario(bad);
        FAIL("missing demand accepted");
    } catch (const ConfigError &e) {
        CHECK(e.field() == "demand");
    }
    fs::remove_all(dir);
}

TEST_CASE("smoke horizons") {
    ExperimentConfig c;
    apply_smoke(c);
    CHECK(c.days == 2);
    CHECK(c.settings.stop.max_steps == 2);
}

TEST_CASE("bundled default fleet validates") {
    const auto root = fs::path(QMARKET_SOURCE_DIR);
    const auto c = load_config(root / "data" / "default_config.json");
    const auto s = load_scenario(c);
    CHECK_NOTHROW(market::validate_fleet(s.fleet));
    CHECK(s.fleet == bilevel::default_fleet());
    CHECK(c.settings.initial_mechanism == market::MechanismParams{100.0,
                                                                  market::Settlement::pay_as_bid,
                                                                  0.1});
}

TEST_CASE("csv writers and readers round trip") {
    const auto rec = stub_record(3);
    const auto monthly = monthly_rows(rec);
    REQUIRE(monthly.size() == rec.months.size());
    std::stringstream ms;
    write_monthly_csv(ms, monthly);
    CHECK(ms.str().rfind("month,price_cap,settlement,penalty_coeff,social_welfare,", 0) == 0);
    CHECK(read_monthly_csv(ms) == monthly);

    const auto ppo = ppo_rows(rec);
    REQUIRE(ppo.size() == rec.ppo_trace.size());
    std::stringstream ps;
    write_ppo_csv(ps, ppo);
    CHECK(read_ppo_csv(ps) == ppo);

    const auto agents = agent_rows(rec, 1);
    REQUIRE(agents.size() == rec.months.size());
    std::stringstream as;
    write_agent_csv(as, agents);
    CHECK(read_agent_csv(as) == agents);

    std::stringstream junk("month,price_cap\n1,abc\n");
    CHECK_THROWS_AS(read_monthly_csv(junk), InputError);
}

TEST_CASE("record directory") {
    const auto dir = scratch_dir("record");
    ExperimentConfig c;
    c.write_hourly = false;
    const auto rec = stub_record(4);
    write_record(dir, c, rec, true);
    for (const char *f : {"config_echo.json", "summary.json", "monthly.csv", "ppo_trace.csv",
                          "agents/agent_0.csv", "agents/agent_1.csv"})
        CHECK(fs::exists(dir / f));

    CHECK(parse_config_text(read_file(dir / "config_echo.json")) == c);
    const auto summary = nlohmann::json::parse(read_file(dir / "summary.json"));
    CHECK(summary == summary_json(c, rec, true));
    CHECK(summary.at("complete") == true);
    CHECK(summary.at("months") == rec.months.size());
    CHECK(summary.at("best_month") == rec.best_month);

    std::ifstream ms(dir / "monthly.csv");
    CHECK(read_monthly_csv(ms) == monthly_rows(rec));

    // Rewriting is idempotent.
    const auto before = read_file(dir / "monthly.csv");
    write_record(dir, c, rec, true);
    CHECK(read_file(dir / "monthly.csv") == before);
    fs::remove_all(dir);
}

TEST_CASE("comparison of identical stubbed arms") {
    bilevel::ExperimentSettings s;
    s.seed = 5;
    s.stop.max_steps = 6;
    std::vector<bilevel::Backend> seen;
    const auto summary = compare_backends(
        s, [](bilevel::Backend) { return std::make_unique<support::QuadraticLowerLevel>(); },
        [&](bilevel::Backend b, const bilevel::ExperimentRecord &) { seen.push_back(b); });
    REQUIRE(summary.complete());
    CHECK(summary.arms[0].backend == bilevel::Backend::vqc);
    CHECK(summary.arms[1].backend == bilevel::Backend::mlp);
    CHECK(summary.arms[0].final_mechanism == summary.arms[1].final_mechanism);
    CHECK(summary.arms[0].social_welfare == summary.arms[1].social_welfare);
    CHECK(seen == std::vector{bilevel::Backend::vqc, bilevel::Backend::mlp});

    std::stringstream csv;
    write_comparison_csv(csv, summary);
    std::vector<std::string> lines;
    for (std::string line; std::getline(csv, line);)
        lines.push_back(line);
    REQUIRE(lines.size() == 5);
    CHECK(lines[0] == "metric,vqc,mlp");
    const char *metrics[] = {"settlement_rule", "price_cap", "penalty_coeff", "social_welfare_usd"};
    for (int i = 0; i < 4; ++i) {
        CHECK(lines[i + 1].rfind(std::string(metrics[i]) + ",", 0) == 0);
        CHECK(std::count(lines[i + 1].begin(), lines[i + 1].end(), ',') == 2);
    }

    std::stringstream table;
    print_comparison(table, summary);
    CHECK(table.str().find("3520736") != std::string::npos);
    CHECK(table.str().find("1354578") != std::string::npos);
}

TEST_CASE("a failing arm marks the comparison incomplete") {
    struct Broken final : bilevel::LowerLevel {
        bilevel::MonthReport run_month(const market::MechanismParams &) override {
            throw std::runtime_error("lower level failed");
        }
        double sw_bound() const override { return 1.0; }
    };
    bilevel::ExperimentSettings s;
    const auto summary = compare_backends(s, [](bilevel::Backend b)
                                              -> std::unique_ptr<bilevel::LowerLevel> {
        if (b == bilevel::Backend::mlp)
            return std::make_unique<Broken>();
        return std::make_unique<support::QuadraticLowerLevel>();
    });
    CHECK_FALSE(summary.complete());
    CHECK(summary.arms[0].complete);
    CHECK(summary.arms[1].error.find("lower level failed") != std::string::npos);
}
