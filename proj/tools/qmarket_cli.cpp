// Command-line driver: run, compare and validate experiment configs.
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "qmarket/app/compare.hpp"
#include "qmarket/app/config.hpp"
#include "qmarket/app/report.hpp"
#include "qmarket/bilevel/orchestrator.hpp"
#include "qmarket/format.hpp"

namespace fs = std::filesystem;
using namespace qmarket;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

// Set once inputs are loaded; later InputErrors are runtime failures.
bool g_running = false;

struct CommonArgs {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out = "results";
    bool smoke = false;
};

void setup_logging() {
    auto logger = spdlog::stderr_logger_mt("qmarket");
    logger->set_pattern("[%H:%M:%S] [%l] %v");
    spdlog::set_default_logger(logger);
    spdlog::set_level(spdlog::level::info);
    if (const char *env = std::getenv("QMARKET_LOG_LEVEL")) {
        const auto level = spdlog::level::from_str(env);
        // from_str maps unknown names to "off"; only accept it when asked for.
        if (level != spdlog::level::off || std::string(env) == "off")
            spdlog::set_level(level);
        else
            spdlog::warn("ignoring unknown QMARKET_LOG_LEVEL '{}'", env);
    }
}

app::ExperimentConfig load(const CommonArgs &args) {
    auto config = app::load_config(args.config_path);
    if (args.seed)
        config.settings.seed = *args.seed;
    if (args.smoke)
        app::apply_smoke(config);
    app::validate(config);
    return config;
}

std::string describe(const market::MechanismParams &m) {
    std::ostringstream os;
    os << market::to_string(m.settlement) << " cap=" << format_double(m.price_cap)
       << " penalty=" << format_double(m.penalty_coeff);
    return os.str();
}

bilevel::MonthObserver progress(const std::string &label) {
    return [label](const bilevel::ExperimentRecord &r) {
        const auto &m = r.months.back();
        spdlog::info("{} month {}: {} sw={} rp={} hhi={} reward={} ({:.1f}s)", label,
                     r.months.size() - 1, describe(m.mechanism),
                     format_double(m.metrics.social_welfare),
                     format_double(m.metrics.renewable_penetration),
                     format_double(m.metrics.hhi), format_double(r.rewards.back()),
                     m.duration_seconds);
    };
}

int cmd_validate(const CommonArgs &args) {
    const auto config = load(args);
    const auto scenario = app::load_scenario(config);
    std::cout << "config ok: backend=" << bilevel::to_string(config.lower.backend)
              << " gencos=" << scenario.fleet.size() << " days=" << scenario.demand.days()
              << " max_steps=" << config.settings.stop.max_steps << '\n';
    return kExitOk;
}

int cmd_run(const CommonArgs &args) {
    const auto config = load(args);
    const auto scenario = app::load_scenario(config);
    const fs::path out(args.out);
    g_running = true;

    bilevel::MarketLowerLevel lower(scenario.fleet, scenario.demand, config.lower,
                                    config.settings.seed);
    auto log = progress(std::string(bilevel::to_string(config.lower.backend)));
    bilevel::ExperimentRecord latest;
    spdlog::info("writing results to {}", out.string());
    const auto record = bilevel::run_experiment(
        lower, config.settings, [&](const bilevel::ExperimentRecord &r) {
            log(r);
            app::write_record(out, config, r, false);
        });
    app::write_record(out, config, record, true);
    spdlog::info("final mechanism: {} sw={} (month {}, {})", describe(record.final_mechanism),
                 format_double(record.final_social_welfare), record.best_month,
                 record.converged ? "converged" : "step cap reached");
    return kExitOk;
}

int cmd_compare(const CommonArgs &args) {
    const auto config = load(args);
    const auto scenario = app::load_scenario(config);
    const fs::path out(args.out);
    g_running = true;

    auto factory = [&](bilevel::Backend b) -> std::unique_ptr<bilevel::LowerLevel> {
        auto lc = config.lower;
        lc.backend = b;
        spdlog::info("starting {} arm", bilevel::to_string(b));
        return std::make_unique<bilevel::MarketLowerLevel>(scenario.fleet, scenario.demand, lc,
                                                           config.settings.seed);
    };
    const auto summary = app::compare_backends(
        config.settings, factory,
        [&](bilevel::Backend b, const bilevel::ExperimentRecord &record) {
            auto arm_config = config;
            arm_config.lower.backend = b;
            app::write_record(out / bilevel::to_string(b), arm_config, record, true);
        });

    fs::create_directories(out);
    {
        std::ofstream csv(out / "comparison.csv", std::ios::binary);
        app::write_comparison_csv(csv, summary);
    }
    app::print_comparison(std::cout, summary);
    if (!summary.complete()) {
        spdlog::error("comparison incomplete");
        return kExitRuntime;
    }
    return kExitOk;
}

} // namespace

int main(int argc, char **argv) {
    setup_logging();

    CLI::App cli{"Bilevel electricity-market mechanism design with quantum and classical "
                 "DQN bidders"};
    cli.require_subcommand(1);

    CommonArgs args;
    auto add_common = [&](CLI::App *sub) {
        sub->add_option("config", args.config_path, "Experiment config (JSON)")
            ->required()
            ->check(CLI::ExistingFile);
        sub->add_option("--seed", args.seed, "Override the master seed");
        sub->add_option("--out", args.out, "Output directory")->capture_default_str();
        sub->add_flag("--smoke", args.smoke, "Tiny horizons: 2 days per month, 2 upper steps");
    };
    auto *run = cli.add_subcommand("run", "Run one bilevel experiment");
    auto *compare = cli.add_subcommand("compare", "Run the VQC and MLP arms and compare");
    auto *validate = cli.add_subcommand("validate", "Check a config and its datasets");
    add_common(run);
    add_common(compare);
    add_common(validate);

    try {
        cli.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = cli.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*run)
            return cmd_run(args);
        if (*compare)
            return cmd_compare(args);
        return cmd_validate(args);
    } catch (const InputError &e) {
        spdlog::error("{}: {}", g_running ? "runtime error" : "config error", e.what());
        return g_running ? kExitRuntime : kExitConfig;
    } catch (const std::exception &e) {
        spdlog::error("runtime error: {}", e.what());
        return kExitRuntime;
    }
}
