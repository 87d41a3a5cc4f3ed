#pragma once
// QFunction with hand-set outputs: q_values returns `values` for every input,
// plus one trainable offset per action so updates are observable.

#include <memory>
#include <vector>

#include "qmarket/error.hpp"
#include "qmarket/qfunc/qfunction.hpp"

namespace support {

class FixedQ final : public qmarket::qfunc::QFunction {
  public:
    explicit FixedQ(std::vector<double> values) : values_(std::move(values)) {}

    std::string_view kind() const override { return "fixed"; }
    std::size_t n_actions() const override { return values_.size(); }
    std::size_t n_parameters() const override { return values_.size(); }
    std::vector<double> q_values(std::span<const double>) const override { return values_; }
    std::vector<double> gradient(std::span<const double>, std::size_t action,
                                 double residual) const override {
        std::vector<double> g(values_.size(), 0.0);
        g[action] = -residual;
        return g;
    }
    void apply_update(std::span<const double> g, double lr) override {
        for (std::size_t i = 0; i < values_.size(); ++i)
            values_[i] -= lr * g[i];
    }
    std::vector<double> parameters() const override { return values_; }
    void set_parameters(std::span<const double> flat) override {
        if (flat.size() != values_.size())
            throw qmarket::InputError("size mismatch");
        values_.assign(flat.begin(), flat.end());
    }
    std::unique_ptr<QFunction> clone() const override { return std::make_unique<FixedQ>(*this); }
    nlohmann::json checkpoint() const override { return values_; }

  private:
    std::vector<double> values_;
};

} // namespace support
