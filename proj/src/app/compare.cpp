#include "qmarket/app/compare.hpp"

#include <iomanip>
#include <ostream>
#include <sstream>

#include "qmarket/format.hpp"

namespace qmarket::app {

ComparisonSummary compare_backends(
    const bilevel::ExperimentSettings &settings, const LowerLevelFactory &make_lower,
    const std::function<void(bilevel::Backend, const bilevel::ExperimentRecord &)> &on_record) {
    ComparisonSummary summary;
    const bilevel::Backend order[2] = {bilevel::Backend::vqc, bilevel::Backend::mlp};
    for (std::size_t k = 0; k < 2; ++k) {
        auto &arm = summary.arms[k];
        arm.backend = order[k];
        try {
            auto lower = make_lower(order[k]);
            const auto record = bilevel::run_experiment(*lower, settings);
            arm.final_mechanism = record.final_mechanism;
            arm.social_welfare = record.final_social_welfare;
            arm.complete = true;
            if (on_record)
                on_record(order[k], record);
        } catch (const std::exception &e) {
            arm.error = e.what();
        }
    }
    return summary;
}

void write_comparison_csv(std::ostream &os, const ComparisonSummary &s) {
    auto cell = [](const ArmResult &a, int row) -> std::string {
        if (!a.complete)
            return "";
        switch (row) {
        case 0:
            return std::string(market::to_string(a.final_mechanism.settlement));
        case 1:
            return format_double(a.final_mechanism.price_cap);
        case 2:
            return format_double(a.final_mechanism.penalty_coeff);
        default:
            return format_double(a.social_welfare);
        }
    };
    const char *names[4] = {"settlement_rule", "price_cap", "penalty_coeff", "social_welfare_usd"};
    os << "metric,vqc,mlp\n";
    for (int r = 0; r < 4; ++r)
        os << names[r] << ',' << cell(s.arms[0], r) << ',' << cell(s.arms[1], r) << '\n';
}

void print_comparison(std::ostream &os, const ComparisonSummary &s) {
    auto arm_cells = [](const ArmResult &a) -> std::array<std::string, 4> {
        if (!a.complete)
            return {"failed", "-", "-", "-"};
        std::ostringstream pc, pen, sw;
        pc << "[0," << std::fixed << std::setprecision(0) << a.final_mechanism.price_cap << "]";
        pen << std::fixed << std::setprecision(1) << 100.0 * a.final_mechanism.penalty_coeff
            << "%";
        sw << std::fixed << std::setprecision(0) << a.social_welfare << " USD";
        return {std::string(market::to_string(a.final_mechanism.settlement)), pc.str(), pen.str(),
                sw.str()};
    };
    const auto vqc = arm_cells(s.arms[0]);
    const auto mlp = arm_cells(s.arms[1]);
    // Published full-scale results, shown for orientation only; this run uses
    // a synthetic desk-scale scenario and is not expected to match them.
    const std::array<std::string, 4> ref_vqc = {"pay_as_clear", "[0,396]", "9%", "3520736 USD"};
    const std::array<std::string, 4> ref_mlp = {"pay_as_clear", "[0,125]", "15%", "1354578 USD"};
    const char *names[4] = {"settlement rule", "price cap", "penalty coefficient",
                            "social welfare"};

    os << std::left << std::setw(22) << "" << std::setw(18) << "w/ VQC" << std::setw(18)
       << "w/o VQC" << std::setw(18) << "ref w/ VQC" << "ref w/o VQC\n";
    for (int r = 0; r < 4; ++r)
        os << std::left << std::setw(22) << names[r] << std::setw(18) << vqc[r] << std::setw(18)
           << mlp[r] << std::setw(18) << ref_vqc[r] << ref_mlp[r] << '\n';
    os << "(ref: published full-scale values on a dataset not bundled here)\n";
    for (const auto &a : s.arms)
        if (!a.complete)
            os << bilevel::to_string(a.backend) << " arm failed: " << a.error << '\n';
}

} // namespace qmarket::app
