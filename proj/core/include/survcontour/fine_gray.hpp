#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "survcontour/dataset.hpp"
#include "survcontour/design.hpp"
#include "survcontour/model.hpp"
#include "survcontour/optimize.hpp"
#include "survcontour/step_function.hpp"

namespace survcontour {

struct FineGrayOptions {
  int max_iter = 25;
  double tol = 1e-9;
  std::optional<std::vector<std::string>> covariates;
};

// Weighted log partial likelihood on the subdistribution risk set (Breslow ties). Subjects with a
// competing event at s stay at risk after s with weight G(t-)/G(s-).
class FineGrayLikelihood {
 public:
  FineGrayLikelihood(Eigen::MatrixXd x, std::vector<double> time, std::vector<int> status, int cause,
                     StepFunction censoring);

  Evaluation evaluate(const Eigen::VectorXd& beta) const;
  double log_likelihood(const Eigen::VectorXd& beta) const;
  StepFunction baseline(const Eigen::VectorXd& beta) const;
  // IPCW weight of subject i in the risk set at time t; 0 when not at risk.
  double weight(std::size_t subject, double t) const;

 private:
  Evaluation compute(const Eigen::VectorXd& beta, bool derivatives) const;

  Eigen::MatrixXd x_;
  std::vector<double> time_;
  std::vector<int> status_;
  int cause_;
  StepFunction censoring_;
  std::vector<std::size_t> ascending_;
};

struct FineGrayFit {
  ColumnRoles roles;
  int cause = 1;
  std::vector<std::string> covariates;
  DesignEncoding encoding;
  Eigen::VectorXd beta;
  Eigen::MatrixXd covariance;
  // Breslow-type cumulative subdistribution hazard on the centered scale.
  StepFunction subdist_baseline;
  // Censoring survival used for the weights.
  StepFunction censoring;
  std::vector<double> loglik_trace;
  double loglik = 0.0;
  int iterations = 0;
  bool converged = false;
  FineGrayOptions options;

  double linear_predictor(const CovariateValues& x) const;
};

FineGrayFit fit_fine_gray(const SurvivalDataset& data, const ColumnRoles& roles, const FineGrayOptions& options = {});

// CIF(t|x) = 1 - exp(-L1(t) exp((x - xbar)' beta)).
Prediction predict_cif(const FineGrayFit& fit, const CovariateValues& x, std::span<const double> times);

class FineGrayModel final : public SurvivalModel {
 public:
  explicit FineGrayModel(FineGrayFit fit) : fit_(std::move(fit)) {}

  std::string family() const override { return "fine_gray"; }
  OutcomeKind outcome_kind() const override { return OutcomeKind::cif; }
  const ColumnRoles& roles() const override { return fit_.roles; }
  Prediction predict(const CovariateValues& x, std::span<const double> times,
                     const std::optional<std::string>& stratum) const override;
  double risk_score(const CovariateValues& x, const std::optional<std::string>& stratum,
                    double horizon) const override;
  std::unique_ptr<SurvivalModel> refit(const SurvivalDataset& data) const override;

  const FineGrayFit& fit() const noexcept { return fit_; }

 private:
  FineGrayFit fit_;
};

}  // namespace survcontour
