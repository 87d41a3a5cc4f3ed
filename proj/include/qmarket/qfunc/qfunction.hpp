#pragma once

#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "qmarket/qfunc/mlp.hpp"
#include "qmarket/qfunc/vqc.hpp"

namespace qmarket::qfunc {

/// Backend-neutral view of a Q-function approximator, used by the DQN
/// machinery. Parameters and gradients cross this boundary as flat vectors
/// in a backend-defined but stable order.
class QFunction {
  public:
    virtual ~QFunction() = default;

    virtual std::string_view kind() const = 0;
    virtual std::size_t n_actions() const = 0;
    virtual std::size_t n_parameters() const = 0;

    virtual std::vector<double> q_values(std::span<const double> features) const = 0;
    /// Flat gradient of 0.5 * residual^2 w.r.t. the parameters.
    virtual std::vector<double> gradient(std::span<const double> features, std::size_t action,
                                         double residual) const = 0;
    /// params -= learning_rate * gradient.
    virtual void apply_update(std::span<const double> gradient, double learning_rate) = 0;

    virtual std::vector<double> parameters() const = 0;
    virtual void set_parameters(std::span<const double> flat) = 0;

    virtual std::unique_ptr<QFunction> clone() const = 0;
    virtual nlohmann::json checkpoint() const = 0;
};

class VqcQFunction final : public QFunction {
  public:
    VqcQFunction(VqcConfig config, VqcParams params);

    std::string_view kind() const override { return "vqc"; }
    std::size_t n_actions() const override { return config_.n_actions; }
    std::size_t n_parameters() const override;
    std::vector<double> q_values(std::span<const double> features) const override;
    std::vector<double> gradient(std::span<const double> features, std::size_t action,
                                 double residual) const override;
    void apply_update(std::span<const double> gradient, double learning_rate) override;
    std::vector<double> parameters() const override;
    void set_parameters(std::span<const double> flat) override;
    std::unique_ptr<QFunction> clone() const override;
    nlohmann::json checkpoint() const override;

    const VqcParams &params() const { return params_; }
    const VqcConfig &config() const { return config_; }

  private:
    VqcConfig config_;
    VqcParams params_;
};

class MlpQFunction final : public QFunction {
  public:
    MlpQFunction(MlpConfig config, MlpParams params);

    std::string_view kind() const override { return "mlp"; }
    std::size_t n_actions() const override { return config_.n_actions; }
    std::size_t n_parameters() const override;
    std::vector<double> q_values(std::span<const double> features) const override;
    std::vector<double> gradient(std::span<const double> features, std::size_t action,
                                 double residual) const override;
    void apply_update(std::span<const double> gradient, double learning_rate) override;
    std::vector<double> parameters() const override;
    void set_parameters(std::span<const double> flat) override;
    std::unique_ptr<QFunction> clone() const override;
    nlohmann::json checkpoint() const override;

    const MlpParams &params() const { return params_; }

  private:
    MlpConfig config_;
    MlpParams params_;
};

} // namespace qmarket::qfunc
