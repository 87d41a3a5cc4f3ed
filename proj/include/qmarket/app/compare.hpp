#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>

#include "qmarket/app/config.hpp"
#include "qmarket/bilevel/orchestrator.hpp"

namespace qmarket::app {

struct ArmResult {
    bilevel::Backend backend = bilevel::Backend::vqc;
    bool complete = false;
    std::string error;  // set when the arm failed
    market::MechanismParams final_mechanism;
    double social_welfare = 0.0;

    bool operator==(const ArmResult &) const = default;
};

/// The VQC arm first, then the MLP arm.
struct ComparisonSummary {
    std::array<ArmResult, 2> arms;

    bool complete() const { return arms[0].complete && arms[1].complete; }
    bool operator==(const ComparisonSummary &) const = default;
};

/// Builds the lower level for one arm.
using LowerLevelFactory = std::function<std::unique_ptr<bilevel::LowerLevel>(bilevel::Backend)>;

/// Runs the experiment once per backend with the same settings and seed.
/// `on_record` (optional) receives each finished arm's record.
ComparisonSummary compare_backends(
    const bilevel::ExperimentSettings &settings, const LowerLevelFactory &make_lower,
    const std::function<void(bilevel::Backend, const bilevel::ExperimentRecord &)> &on_record = {});

/// CSV `metric,vqc,mlp` with the rows settlement_rule, price_cap,
/// penalty_coeff, social_welfare_usd.
void write_comparison_csv(std::ostream &os, const ComparisonSummary &summary);

/// Human-readable table with the published reference values alongside.
void print_comparison(std::ostream &os, const ComparisonSummary &summary);

} // namespace qmarket::app
