#include "survcontour/fine_gray.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "survcontour/cox.hpp"
#include "survcontour/error.hpp"
#include "survcontour/nonparametric.hpp"

namespace survcontour {

namespace {

struct Group {
  std::size_t begin;
  std::size_t end;
  double time;
  int events;  // cause-of-interest events
};

struct CompetingSums {
  double g_left = 1.0;  // G(t-)
  double c0 = 0.0;
  Eigen::VectorXd c1;
  Eigen::MatrixXd c2;
};

}  // namespace

FineGrayLikelihood::FineGrayLikelihood(Eigen::MatrixXd x, std::vector<double> time, std::vector<int> status,
                                       int cause, StepFunction censoring)
    : x_(std::move(x)), time_(std::move(time)), status_(std::move(status)), cause_(cause),
      censoring_(std::move(censoring)) {
  if (static_cast<std::size_t>(x_.rows()) != time_.size() || status_.size() != time_.size()) {
    throw ValidationError("fine-gray likelihood: inconsistent input lengths");
  }
  ascending_.resize(time_.size());
  std::iota(ascending_.begin(), ascending_.end(), std::size_t{0});
  std::stable_sort(ascending_.begin(), ascending_.end(),
                   [&](std::size_t a, std::size_t b) { return time_[a] < time_[b]; });
}

double FineGrayLikelihood::weight(std::size_t subject, double t) const {
  const double ti = time_.at(subject);
  if (ti >= t) return 1.0;
  const int s = status_[subject];
  if (s == 0 || s == cause_) return 0.0;
  return censoring_.left_limit(t) / censoring_.left_limit(ti);
}

Evaluation FineGrayLikelihood::evaluate(const Eigen::VectorXd& beta) const { return compute(beta, true); }

double FineGrayLikelihood::log_likelihood(const Eigen::VectorXd& beta) const { return compute(beta, false).value; }

Evaluation FineGrayLikelihood::compute(const Eigen::VectorXd& beta, bool derivatives) const {
  const Eigen::Index p = x_.cols();
  const Eigen::VectorXd eta = p > 0 ? Eigen::VectorXd(x_ * beta) : Eigen::VectorXd::Zero(x_.rows());
  const double shift = eta.size() > 0 ? eta.maxCoeff() : 0.0;

  std::vector<Group> groups;
  for (std::size_t i = 0; i < ascending_.size();) {
    Group g{i, i, time_[ascending_[i]], 0};
    while (g.end < ascending_.size() && time_[ascending_[g.end]] == g.time) {
      if (status_[ascending_[g.end]] == cause_) ++g.events;
      ++g.end;
    }
    i = g.end;
    groups.push_back(g);
  }

  // Ascending pass: sums over subjects whose competing event happened strictly before each group.
  std::vector<CompetingSums> competing(groups.size());
  {
    CompetingSums acc;
    acc.c1 = Eigen::VectorXd::Zero(p);
    acc.c2 = Eigen::MatrixXd::Zero(p, p);
    for (std::size_t k = 0; k < groups.size(); ++k) {
      const Group& g = groups[k];
      if (g.events > 0) {
        competing[k] = acc;
        competing[k].g_left = censoring_.left_limit(g.time);
      }
      const double g_own = censoring_.left_limit(g.time);
      for (std::size_t i = g.begin; i < g.end; ++i) {
        const std::size_t r = ascending_[i];
        const int s = status_[r];
        if (s == 0 || s == cause_) continue;
        const double v = std::exp(eta(static_cast<Eigen::Index>(r)) - shift) / g_own;
        const Eigen::VectorXd xr = x_.row(static_cast<Eigen::Index>(r)).transpose();
        acc.c0 += v;
        acc.c1.noalias() += v * xr;
        if (derivatives) acc.c2.noalias() += v * xr * xr.transpose();
      }
    }
  }

  Evaluation e;
  e.gradient = Eigen::VectorXd::Zero(p);
  e.hessian = Eigen::MatrixXd::Zero(p, p);
  double s0 = 0.0;
  Eigen::VectorXd s1 = Eigen::VectorXd::Zero(p);
  Eigen::MatrixXd s2 = Eigen::MatrixXd::Zero(p, p);
  for (std::size_t k = groups.size(); k-- > 0;) {
    const Group& g = groups[k];
    for (std::size_t i = g.begin; i < g.end; ++i) {
      const std::size_t r = ascending_[i];
      const double w = std::exp(eta(static_cast<Eigen::Index>(r)) - shift);
      const Eigen::VectorXd xr = x_.row(static_cast<Eigen::Index>(r)).transpose();
      s0 += w;
      s1.noalias() += w * xr;
      if (derivatives) s2.noalias() += w * xr * xr.transpose();
      if (status_[r] == cause_) {
        e.value += eta(static_cast<Eigen::Index>(r)) - shift;
        e.gradient += xr;
      }
    }
    if (g.events == 0) continue;
    const CompetingSums& c = competing[k];
    const double r0 = s0 + c.g_left * c.c0;
    const Eigen::VectorXd r1 = s1 + c.g_left * c.c1;
    const double d = static_cast<double>(g.events);
    e.value -= d * std::log(r0);
    e.gradient -= d * r1 / r0;
    if (derivatives) {
      const Eigen::MatrixXd r2 = s2 + c.g_left * c.c2;
      e.hessian -= d * (r2 / r0 - r1 * r1.transpose() / (r0 * r0));
    }
  }
  return e;
}

StepFunction FineGrayLikelihood::baseline(const Eigen::VectorXd& beta) const {
  const Eigen::VectorXd eta = x_.cols() > 0 ? Eigen::VectorXd(x_ * beta) : Eigen::VectorXd::Zero(x_.rows());
  std::vector<double> knots, values;
  double cum = 0.0;
  const std::size_t n = ascending_.size();
  for (std::size_t i = 0; i < n;) {
    const double t = time_[ascending_[i]];
    int d = 0;
    std::size_t j = i;
    for (; j < n && time_[ascending_[j]] == t; ++j) d += status_[ascending_[j]] == cause_ ? 1 : 0;
    if (d > 0) {
      double r0 = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        const double w = weight(k, t);
        if (w > 0.0) r0 += w * std::exp(eta(static_cast<Eigen::Index>(k)));
      }
      cum += static_cast<double>(d) / r0;
      knots.push_back(t);
      values.push_back(cum);
    }
    i = j;
  }
  return StepFunction(std::move(knots), std::move(values), 0.0);
}

double FineGrayFit::linear_predictor(const CovariateValues& x) const {
  if (beta.size() == 0) return 0.0;
  return (encoding.encode(x) - encoding.means()).dot(beta);
}

FineGrayFit fit_fine_gray(const SurvivalDataset& data, const ColumnRoles& roles, const FineGrayOptions& options) {
  if (roles.strata) throw ValidationError("fine_gray does not support strata");
  FineGrayFit fit;
  fit.roles = roles;
  fit.cause = roles.cause_of_interest;
  fit.options = options;
  fit.covariates = options.covariates.value_or(roles.covariates());
  fit.encoding = DesignEncoding(data, fit.covariates);

  const Eigen::MatrixXd centered = fit.encoding.encode(data).rowwise() - fit.encoding.means().transpose();
  if (fit.encoding.width() > 0) require_full_rank(centered, fit.encoding.column_names());

  const auto& status = data.status();
  if (std::none_of(status.begin(), status.end(), [&](int s) { return s == fit.cause; })) {
    throw ValidationError("no events of cause " + std::to_string(fit.cause));
  }
  fit.censoring = censoring_km(data.time(), status);

  FineGrayLikelihood lik(centered, data.time(), status, fit.cause, fit.censoring);
  NewtonOptions newton;
  newton.max_iter = options.max_iter;
  newton.tol = options.tol;
  const Eigen::VectorXd scales = fit.encoding.scales();
  newton.on_accept = [&](const Eigen::VectorXd& b) { check_divergence(b, scales); };
  auto result = newton_maximize([&](const Eigen::VectorXd& b) { return lik.evaluate(b); },
                                Eigen::VectorXd::Zero(static_cast<Eigen::Index>(fit.encoding.width())), newton);
  if (!result.converged) {
    throw NonconvergenceError("nonconvergence: Fine-Gray fit did not converge in " +
                              std::to_string(options.max_iter) + " iterations");
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
  }
  fit.subdist_baseline = lik.baseline(fit.beta);
  return fit;
}

Prediction predict_cif(const FineGrayFit& fit, const CovariateValues& x, std::span<const double> times) {
  const double risk = std::exp(fit.linear_predictor(x));
  const StepFunction& base = fit.subdist_baseline;
  Prediction p;
  for (double t : times) {
    double cif = 1.0 - std::exp(-base(t) * risk);
    if (cif > 1.0) {
      cif = 1.0;
      p.clamped = true;
    }
    p.values.push_back(std::max(0.0, cif));
    p.extrapolated.push_back(base.empty() ? t > 0.0 : t > base.last_knot());
  }
  return p;
}

Prediction FineGrayModel::predict(const CovariateValues& x, std::span<const double> times,
                                  const std::optional<std::string>& stratum) const {
  if (stratum) throw ValidationError("stratum given for an unstratified fit");
  return predict_cif(fit_, x, times);
}

double FineGrayModel::risk_score(const CovariateValues& x, const std::optional<std::string>&, double) const {
  return fit_.linear_predictor(x);
}

std::unique_ptr<SurvivalModel> FineGrayModel::refit(const SurvivalDataset& data) const {
  return std::make_unique<FineGrayModel>(fit_fine_gray(data, fit_.roles, fit_.options));
}

}  // namespace survcontour
