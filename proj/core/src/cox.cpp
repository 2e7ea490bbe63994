#include "survcontour/cox.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "survcontour/error.hpp"

namespace survcontour {

const char* to_string(TiesMethod ties) { return ties == TiesMethod::efron ? "efron" : "breslow"; }

TiesMethod parse_ties(std::string_view text) {
  if (text == "efron") return TiesMethod::efron;
  if (text == "breslow") return TiesMethod::breslow;
  throw ValidationError("unknown ties method '" + std::string(text) + "' (expected efron or breslow)");
}

// ---------------------------------------------------------------------------
// Partial likelihood

CoxPartialLikelihood::CoxPartialLikelihood(Eigen::MatrixXd x, std::vector<double> time, std::vector<int> event,
                                           std::vector<int> stratum, TiesMethod ties)
    : x_(std::move(x)), time_(std::move(time)), event_(std::move(event)), stratum_(std::move(stratum)), ties_(ties) {
  const auto n = time_.size();
  if (static_cast<std::size_t>(x_.rows()) != n || event_.size() != n || stratum_.size() != n) {
    throw ValidationError("partial likelihood: inconsistent input lengths");
  }
  int n_strata = 0;
  for (int s : stratum_) n_strata = std::max(n_strata, s + 1);
  order_.assign(static_cast<std::size_t>(n_strata), {});
  for (std::size_t i = 0; i < n; ++i) order_[static_cast<std::size_t>(stratum_[i])].push_back(i);
  for (auto& rows : order_) {
    std::stable_sort(rows.begin(), rows.end(), [&](std::size_t a, std::size_t b) { return time_[a] > time_[b]; });
  }
}

Evaluation CoxPartialLikelihood::evaluate(const Eigen::VectorXd& beta) const { return compute(beta, true); }

double CoxPartialLikelihood::log_likelihood(const Eigen::VectorXd& beta) const { return compute(beta, false).value; }

Evaluation CoxPartialLikelihood::compute(const Eigen::VectorXd& beta, bool derivatives) const {
  const Eigen::Index p = x_.cols();
  const Eigen::VectorXd eta = p > 0 ? Eigen::VectorXd(x_ * beta) : Eigen::VectorXd::Zero(x_.rows());
  // exp(eta - shift) keeps the risk sums finite; the shift cancels in the likelihood.
  const double shift = eta.size() > 0 ? eta.maxCoeff() : 0.0;

  Evaluation e;
  e.gradient = Eigen::VectorXd::Zero(p);
  e.hessian = Eigen::MatrixXd::Zero(p, p);
  Eigen::VectorXd s1(p), d1(p), xr(p);
  Eigen::MatrixXd s2(p, p), d2(p, p);

  for (const auto& rows : order_) {
    double s0 = 0.0;
    s1.setZero();
    if (derivatives) s2.setZero();
    std::size_t i = 0;
    while (i < rows.size()) {
      const double t = time_[rows[i]];
      double d0 = 0.0;
      int deaths = 0;
      d1.setZero();
      if (derivatives) d2.setZero();
      std::size_t j = i;
      for (; j < rows.size() && time_[rows[j]] == t; ++j) {
        const std::size_t r = rows[j];
        const double w = std::exp(eta(static_cast<Eigen::Index>(r)) - shift);
        xr = x_.row(static_cast<Eigen::Index>(r)).transpose();
        s0 += w;
        s1.noalias() += w * xr;
        if (derivatives) s2.noalias() += w * xr * xr.transpose();
        if (event_[r] != 0) {
          ++deaths;
          d0 += w;
          d1.noalias() += w * xr;
          if (derivatives) d2.noalias() += w * xr * xr.transpose();
          e.value += eta(static_cast<Eigen::Index>(r)) - shift;
          e.gradient += xr;
        }
      }
      for (int l = 0; l < deaths; ++l) {
        const double frac = ties_ == TiesMethod::efron ? static_cast<double>(l) / deaths : 0.0;
        const double denom = s0 - frac * d0;
        const Eigen::VectorXd num1 = s1 - frac * d1;
        e.value -= std::log(denom);
        e.gradient -= num1 / denom;
        if (derivatives) {
          e.hessian -= (s2 - frac * d2) / denom - num1 * num1.transpose() / (denom * denom);
        }
      }
      i = j;
    }
  }
  return e;
}

std::vector<StepFunction> CoxPartialLikelihood::breslow_baseline(const Eigen::VectorXd& beta, int n_strata) const {
  const Eigen::VectorXd eta = x_.cols() > 0 ? Eigen::VectorXd(x_ * beta) : Eigen::VectorXd::Zero(x_.rows());
  const double shift = eta.size() > 0 ? eta.maxCoeff() : 0.0;
  std::vector<StepFunction> out;
  for (int s = 0; s < n_strata; ++s) {
    if (static_cast<std::size_t>(s) >= order_.size() || order_[static_cast<std::size_t>(s)].empty()) {
      out.emplace_back(std::vector<double>{}, std::vector<double>{}, 0.0);
      continue;
    }
    const auto& rows = order_[static_cast<std::size_t>(s)];
    std::vector<double> times, increments;
    double s0 = 0.0;
    std::size_t i = 0;
    while (i < rows.size()) {
      const double t = time_[rows[i]];
      int deaths = 0;
      std::size_t j = i;
      for (; j < rows.size() && time_[rows[j]] == t; ++j) {
        s0 += std::exp(eta(static_cast<Eigen::Index>(rows[j])) - shift);
        deaths += event_[rows[j]] != 0 ? 1 : 0;
      }
      if (deaths > 0) {
        times.push_back(t);
        increments.push_back(static_cast<double>(deaths) * std::exp(-shift) / s0);
      }
      i = j;
    }
    // Swept in descending time; accumulate ascending.
    std::reverse(times.begin(), times.end());
    std::reverse(increments.begin(), increments.end());
    std::vector<double> cumulative(increments.size());
    std::partial_sum(increments.begin(), increments.end(), cumulative.begin());
    out.emplace_back(std::move(times), std::move(cumulative), 0.0);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Fitting

void check_divergence(const Eigen::VectorXd& beta, const Eigen::VectorXd& scales, double cap) {
  for (Eigen::Index j = 0; j < beta.size(); ++j) {
    if (!(std::abs(beta(j) * scales(j)) <= cap)) {
      throw NonconvergenceError("nonconvergence: possible monotone likelihood");
    }
  }
}

void check_infinite_coefficients(const Eigen::MatrixXd& covariance, const Eigen::VectorXd& scales) {
  for (Eigen::Index j = 0; j < covariance.rows(); ++j) {
    const double se = std::sqrt(std::max(0.0, covariance(j, j)));
    if (!std::isfinite(covariance(j, j)) || !(se * scales(j) <= 1e3)) {
      throw NonconvergenceError("nonconvergence: possible monotone likelihood");
    }
  }
}

double CoxFit::linear_predictor(const CovariateValues& x) const {
  if (beta.size() == 0) return 0.0;
  return (encoding.encode(x) - encoding.means()).dot(beta);
}

const StepFunction& CoxFit::baseline_for(const std::optional<std::string>& stratum) const {
  if (!roles.strata) {
    if (stratum) throw ValidationError("stratum given for an unstratified fit");
    return baseline.front();
  }
  if (!stratum) throw ValidationError("stratified fit: a stratum level is required");
  auto it = std::find(strata_levels.begin(), strata_levels.end(), *stratum);
  if (it == strata_levels.end()) throw ValidationError("unknown stratum level '" + *stratum + "'");
  return baseline[static_cast<std::size_t>(it - strata_levels.begin())];
}

CoxFit fit_cox(const SurvivalDataset& data, const ColumnRoles& roles, const CoxOptions& options) {
  CoxFit fit;
  fit.roles = roles;
  fit.options = options;
  fit.ties = options.ties;
  fit.covariates = options.covariates.value_or(roles.covariates());
  fit.encoding = DesignEncoding(data, fit.covariates);

  const Eigen::MatrixXd centered = fit.encoding.encode(data).rowwise() - fit.encoding.means().transpose();
  if (fit.encoding.width() > 0) require_full_rank(centered, fit.encoding.column_names());

  auto events = data.event_indicator(roles.cause_of_interest);
  if (std::none_of(events.begin(), events.end(), [](int e) { return e != 0; })) {
    throw ValidationError("no events of cause " + std::to_string(roles.cause_of_interest));
  }

  std::vector<int> strata(data.size(), 0);
  int n_strata = 1;
  if (roles.strata) {
    const Column& sc = data.column(*roles.strata);
    if (!sc.is_categorical()) throw ValidationError("strata column '" + *roles.strata + "' must be categorical");
    strata = sc.codes();
    fit.strata_levels = sc.levels();
    n_strata = static_cast<int>(fit.strata_levels.size());
  }

  CoxPartialLikelihood pl(centered, data.time(), std::move(events), std::move(strata), options.ties);
  NewtonOptions newton;
  newton.max_iter = options.max_iter;
  newton.tol = options.tol;
  const Eigen::VectorXd scales = fit.encoding.scales();
  newton.on_accept = [&](const Eigen::VectorXd& b) { check_divergence(b, scales); };

  auto result = newton_maximize([&](const Eigen::VectorXd& b) { return pl.evaluate(b); },
                                Eigen::VectorXd::Zero(static_cast<Eigen::Index>(fit.encoding.width())), newton);
  if (!result.converged) {
    throw NonconvergenceError("nonconvergence: Cox fit did not converge in " + std::to_string(options.max_iter) +
                              " iterations");
  }
  fit.beta = result.x;
  fit.loglik = result.at_optimum.value;
  fit.loglik_trace = result.trace;
  fit.iterations = result.iterations;
  fit.converged = true;
  if (fit.beta.size() > 0) {
    fit.covariance = (-result.at_optimum.hessian).inverse();
    fit.covariance = 0.5 * (fit.covariance + fit.covariance.transpose()).eval();
    check_infinite_coefficients(fit.covariance, scales);
  } else {
    fit.covariance.resize(0, 0);
  }
  fit.baseline = pl.breslow_baseline(fit.beta, n_strata);
  return fit;
}

Prediction predict_survival(const CoxFit& fit, const CovariateValues& x, std::span<const double> times,
                            const std::optional<std::string>& stratum) {
  const StepFunction& base = fit.baseline_for(stratum);
  const double risk = std::exp(fit.linear_predictor(x));
  Prediction p;
  p.values.reserve(times.size());
  p.extrapolated.reserve(times.size());
  for (double t : times) {
    p.values.push_back(std::exp(-base(t) * risk));
    p.extrapolated.push_back(base.empty() ? t > 0.0 : t > base.last_knot());
  }
  return p;
}

// ---------------------------------------------------------------------------
// Model adapter

std::string CoxModel::family() const { return fit_.roles.strata ? "stratified_cox" : "cox"; }

Prediction CoxModel::predict(const CovariateValues& x, std::span<const double> times,
                             const std::optional<std::string>& stratum) const {
  return predict_survival(fit_, x, times, stratum);
}

double CoxModel::risk_score(const CovariateValues& x, const std::optional<std::string>&, double) const {
  return fit_.linear_predictor(x);
}

std::unique_ptr<SurvivalModel> CoxModel::refit(const SurvivalDataset& data) const {
  return std::make_unique<CoxModel>(fit_cox(data, fit_.roles, fit_.options));
}

BootstrapEnsemble bootstrap_ci(const SurvivalDataset& data, const ColumnRoles& roles, const CoxOptions& cox,
                               const BootstrapOptions& options) {
  const CoxModel model(fit_cox(data, roles, cox));
  return BootstrapEnsemble(model, data, options);
}

}  // namespace survcontour
