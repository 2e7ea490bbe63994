#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "survcontour/dataset.hpp"
#include "survcontour/design.hpp"
#include "survcontour/model.hpp"
#include "survcontour/optimize.hpp"

namespace survcontour {

// Accelerated failure time families: log T = mu + x'gamma + sigma * W.
enum class Distribution { exponential, weibull, lognormal, loglogistic };

const char* to_string(Distribution dist);
Distribution parse_distribution(std::string_view text);

struct ParametricOptions {
  int max_iter = 25;
  double tol = 1e-9;
  // Fixes sigma (e.g. 1.0 turns a Weibull fit into an exponential fit).
  std::optional<double> fixed_scale;
  std::optional<std::vector<std::string>> covariates;
};

// Right-censored log likelihood on the time scale, sum_events log f(t) + sum_censored log S(t).
// Parameters: [intercept, slopes on centered covariates..., log sigma (absent when sigma is fixed)].
class AftLikelihood {
 public:
  AftLikelihood(Distribution dist, Eigen::MatrixXd x_centered, std::vector<double> time, std::vector<int> event,
                std::optional<double> fixed_scale);

  Evaluation evaluate(const Eigen::VectorXd& theta) const;
  double log_likelihood(const Eigen::VectorXd& theta) const;
  Eigen::Index dimension() const noexcept;
  bool scale_is_free() const noexcept { return !fixed_scale_; }

 private:
  Distribution dist_;
  Eigen::MatrixXd x_;
  Eigen::VectorXd log_time_;
  std::vector<int> event_;
  std::optional<double> fixed_scale_;
};

struct ParametricFit {
  ColumnRoles roles;
  Distribution distribution = Distribution::weibull;
  std::vector<std::string> covariates;
  DesignEncoding encoding;
  double intercept = 0.0;
  Eigen::VectorXd coefficients;  // effects on log time, centered covariates
  double scale = 1.0;            // sigma
  bool scale_fixed = false;
  Eigen::MatrixXd covariance;    // over the optimizer parameters (log sigma last when free)
  double loglik = 0.0;
  std::vector<double> loglik_trace;
  int iterations = 0;
  bool converged = false;
  // Zero times are replaced by this shift (half the smallest positive time); 0 when none occurred.
  double zero_time_shift = 0.0;
  std::size_t shifted_rows = 0;
  ParametricOptions options;

  // mu + (x - xbar)' gamma.
  double location(const CovariateValues& x) const;
  double median(const CovariateValues& x) const;
};

ParametricFit fit_parametric(const SurvivalDataset& data, const ColumnRoles& roles, Distribution dist,
                             const ParametricOptions& options = {});

Prediction predict_survival_parametric(const ParametricFit& fit, const CovariateValues& x,
                                       std::span<const double> times);

// Standard error-distribution survival S_W(z) for the family.
double standard_survival(Distribution dist, double z);

class ParametricModel final : public SurvivalModel {
 public:
  explicit ParametricModel(ParametricFit fit) : fit_(std::move(fit)) {}

  std::string family() const override { return "parametric"; }
  OutcomeKind outcome_kind() const override { return OutcomeKind::survival; }
  const ColumnRoles& roles() const override { return fit_.roles; }
  Prediction predict(const CovariateValues& x, std::span<const double> times,
                     const std::optional<std::string>& stratum) const override;
  // Negative predicted median survival time.
  double risk_score(const CovariateValues& x, const std::optional<std::string>& stratum,
                    double horizon) const override;
  std::unique_ptr<SurvivalModel> refit(const SurvivalDataset& data) const override;

  const ParametricFit& fit() const noexcept { return fit_; }

 private:
  ParametricFit fit_;
};

}  // namespace survcontour
