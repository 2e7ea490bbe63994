#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "survcontour/bootstrap.hpp"
#include "survcontour/dataset.hpp"
#include "survcontour/design.hpp"
#include "survcontour/model.hpp"
#include "survcontour/optimize.hpp"
#include "survcontour/step_function.hpp"

namespace survcontour {

enum class TiesMethod { efron, breslow };

const char* to_string(TiesMethod ties);
TiesMethod parse_ties(std::string_view text);

struct CoxOptions {
  TiesMethod ties = TiesMethod::efron;
  int max_iter = 25;
  double tol = 1e-9;
  // Overrides roles.covariates() when set; an empty list fits the null model.
  std::optional<std::vector<std::string>> covariates;
};

// Log partial likelihood over (optionally stratified) risk sets. Rows need not be sorted.
class CoxPartialLikelihood {
 public:
  CoxPartialLikelihood(Eigen::MatrixXd x, std::vector<double> time, std::vector<int> event,
                       std::vector<int> stratum, TiesMethod ties);

  Evaluation evaluate(const Eigen::VectorXd& beta) const;
  double log_likelihood(const Eigen::VectorXd& beta) const;
  // Breslow cumulative baseline hazard per stratum code, at linear predictor x * beta.
  std::vector<StepFunction> breslow_baseline(const Eigen::VectorXd& beta, int n_strata) const;

  Eigen::Index dimension() const noexcept { return x_.cols(); }

 private:
  Evaluation compute(const Eigen::VectorXd& beta, bool derivatives) const;

  Eigen::MatrixXd x_;
  std::vector<double> time_;
  std::vector<int> event_;
  std::vector<int> stratum_;
  TiesMethod ties_;
  // Row indices per stratum, time descending.
  std::vector<std::vector<std::size_t>> order_;
};

struct CoxFit {
  ColumnRoles roles;
  std::vector<std::string> covariates;
  DesignEncoding encoding;
  Eigen::VectorXd beta;
  Eigen::MatrixXd covariance;
  // Stratum levels; empty for unstratified fits.
  std::vector<std::string> strata_levels;
  // Breslow cumulative baseline hazard on the centered scale, one per stratum (one if unstratified).
  std::vector<StepFunction> baseline;
  std::vector<double> loglik_trace;
  double loglik = 0.0;
  int iterations = 0;
  bool converged = false;
  TiesMethod ties = TiesMethod::efron;
  CoxOptions options;

  // (x - centering)' beta.
  double linear_predictor(const CovariateValues& x) const;
  const StepFunction& baseline_for(const std::optional<std::string>& stratum) const;
};

// Newton-Raphson with step halving on the Efron or Breslow log partial likelihood, summed over
// strata. Event = status == roles.cause_of_interest.
CoxFit fit_cox(const SurvivalDataset& data, const ColumnRoles& roles, const CoxOptions& options = {});

// S(t|x) = exp(-L0(t) exp((x - xbar)' beta)); L0 held constant beyond its last knot (flagged).
Prediction predict_survival(const CoxFit& fit, const CovariateValues& x, std::span<const double> times,
                            const std::optional<std::string>& stratum = std::nullopt);

class CoxModel final : public SurvivalModel {
 public:
  explicit CoxModel(CoxFit fit) : fit_(std::move(fit)) {}

  std::string family() const override;
  OutcomeKind outcome_kind() const override { return OutcomeKind::survival; }
  const ColumnRoles& roles() const override { return fit_.roles; }
  std::vector<std::string> strata() const override { return fit_.strata_levels; }
  Prediction predict(const CovariateValues& x, std::span<const double> times,
                     const std::optional<std::string>& stratum) const override;
  double risk_score(const CovariateValues& x, const std::optional<std::string>& stratum,
                    double horizon) const override;
  std::unique_ptr<SurvivalModel> refit(const SurvivalDataset& data) const override;

  const CoxFit& fit() const noexcept { return fit_; }

 private:
  CoxFit fit_;
};

// Percentile bootstrap bands for Cox predictions (resampling within strata when stratified).
BootstrapEnsemble bootstrap_ci(const SurvivalDataset& data, const ColumnRoles& roles, const CoxOptions& cox,
                               const BootstrapOptions& options);

// Shared by the regression families: throws NonconvergenceError when any coefficient exceeds the
// cap on the standardized scale, or when a converged fit has an essentially flat direction.
void check_divergence(const Eigen::VectorXd& beta, const Eigen::VectorXd& scales, double cap = 50.0);
void check_infinite_coefficients(const Eigen::MatrixXd& covariance, const Eigen::VectorXd& scales);

}  // namespace survcontour
