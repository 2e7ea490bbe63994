#include "survcontour/parametric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "survcontour/cox.hpp"
#include "survcontour/error.hpp"

namespace survcontour {

const char* to_string(Distribution dist) {
  switch (dist) {
    case Distribution::exponential: return "exponential";
    case Distribution::weibull: return "weibull";
    case Distribution::lognormal: return "lognormal";
    case Distribution::loglogistic: return "loglogistic";
  }
  return "unknown";
}

Distribution parse_distribution(std::string_view text) {
  if (text == "exponential") return Distribution::exponential;
  if (text == "weibull") return Distribution::weibull;
  if (text == "lognormal") return Distribution::lognormal;
  if (text == "loglogistic") return Distribution::loglogistic;
  throw ValidationError("invalid distribution '" + std::string(text) +
                        "' (expected exponential, weibull, lognormal or loglogistic)");
}

namespace {

// log density / log survival of the standardized error with first two z-derivatives.
struct LogTerm {
  double value;
  double d1;
  double d2;
};

constexpr double kLogSqrt2Pi = 0.91893853320467274178;

double log1p_exp(double z) { return z > 30.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

LogTerm log_density(Distribution dist, double z) {
  switch (dist) {
    case Distribution::exponential:
    case Distribution::weibull: {
      const double ez = std::exp(z);
      return {z - ez, 1.0 - ez, -ez};
    }
    case Distribution::lognormal:
      return {-0.5 * z * z - kLogSqrt2Pi, -z, -1.0};
    case Distribution::loglogistic: {
      const double p = 1.0 / (1.0 + std::exp(-z));
      return {z - 2.0 * log1p_exp(z), 1.0 - 2.0 * p, -2.0 * p * (1.0 - p)};
    }
  }
  return {0.0, 0.0, 0.0};
}

LogTerm log_survival(Distribution dist, double z) {
  switch (dist) {
    case Distribution::exponential:
    case Distribution::weibull: {
      const double ez = std::exp(z);
      return {-ez, -ez, -ez};
    }
    case Distribution::lognormal: {
      double log_q = 0.0;
      double mills = 0.0;  // phi(z) / Q(z)
      if (z < 30.0) {
        const double q = 0.5 * std::erfc(z / std::numbers::sqrt2);
        log_q = std::log(q);
        mills = std::exp(-0.5 * z * z - kLogSqrt2Pi - log_q);
      } else {
        // Asymptotic tail Q(z) ~ phi(z)/z (1 - 1/z^2 + 3/z^4).
        const double z2 = z * z;
        const double series = 1.0 - 1.0 / z2 + 3.0 / (z2 * z2);
        log_q = -0.5 * z2 - kLogSqrt2Pi - std::log(z) + std::log(series);
        mills = z / series;
      }
      return {log_q, -mills, -mills * (mills - z)};
    }
    case Distribution::loglogistic: {
      const double p = 1.0 / (1.0 + std::exp(-z));
      return {-log1p_exp(z), -p, -p * (1.0 - p)};
    }
  }
  return {0.0, 0.0, 0.0};
}

// Median of the standardized error.
double error_median(Distribution dist) {
  switch (dist) {
    case Distribution::exponential:
    case Distribution::weibull: return std::log(std::log(2.0));
    case Distribution::lognormal:
    case Distribution::loglogistic: return 0.0;
  }
  return 0.0;
}

}  // namespace

double standard_survival(Distribution dist, double z) { return std::exp(log_survival(dist, z).value); }

// ---------------------------------------------------------------------------
// Likelihood

AftLikelihood::AftLikelihood(Distribution dist, Eigen::MatrixXd x_centered, std::vector<double> time,
                             std::vector<int> event, std::optional<double> fixed_scale)
    : dist_(dist), x_(std::move(x_centered)), event_(std::move(event)), fixed_scale_(fixed_scale) {
  if (dist_ == Distribution::exponential) fixed_scale_ = 1.0;
  if (fixed_scale_ && !(*fixed_scale_ > 0.0)) throw ValidationError("fixed scale must be positive");
  if (static_cast<std::size_t>(x_.rows()) != time.size() || event_.size() != time.size()) {
    throw ValidationError("aft likelihood: inconsistent input lengths");
  }
  log_time_.resize(static_cast<Eigen::Index>(time.size()));
  for (std::size_t i = 0; i < time.size(); ++i) {
    if (!(time[i] > 0.0)) throw ValidationError("aft likelihood: times must be positive");
    log_time_(static_cast<Eigen::Index>(i)) = std::log(time[i]);
  }
}

Eigen::Index AftLikelihood::dimension() const noexcept { return 1 + x_.cols() + (fixed_scale_ ? 0 : 1); }

double AftLikelihood::log_likelihood(const Eigen::VectorXd& theta) const { return evaluate(theta).value; }

Evaluation AftLikelihood::evaluate(const Eigen::VectorXd& theta) const {
  const Eigen::Index p = x_.cols();
  const Eigen::Index dim = dimension();
  if (theta.size() != dim) throw ValidationError("aft likelihood: parameter vector has the wrong size");
  const double log_sigma = fixed_scale_ ? std::log(*fixed_scale_) : theta(dim - 1);
  const double sigma = std::exp(log_sigma);
  const Eigen::Index s_idx = dim - 1;

  Evaluation e;
  e.gradient = Eigen::VectorXd::Zero(dim);
  e.hessian = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::VectorXd u(1 + p);  // d eta / d(mu, gamma)
  u(0) = 1.0;
  for (Eigen::Index i = 0; i < x_.rows(); ++i) {
    if (p > 0) u.tail(p) = x_.row(i).transpose();
    const double eta = theta.head(1 + p).dot(u);
    const double z = (log_time_(i) - eta) / sigma;
    const bool event = event_[static_cast<std::size_t>(i)] != 0;
    const LogTerm g = event ? log_density(dist_, z) : log_survival(dist_, z);
    e.value += g.value;
    if (event) e.value -= log_sigma + log_time_(i);

    const double d_eta = -g.d1 / sigma;
    const double dd_eta = g.d2 / (sigma * sigma);
    e.gradient.head(1 + p) += d_eta * u;
    e.hessian.topLeftCorner(1 + p, 1 + p) += dd_eta * u * u.transpose();
    if (!fixed_scale_) {
      const double d_s = -g.d1 * z - (event ? 1.0 : 0.0);
      const double dd_s = g.d2 * z * z + g.d1 * z;
      const double d_eta_s = (g.d2 * z + g.d1) / sigma;
      e.gradient(s_idx) += d_s;
      e.hessian(s_idx, s_idx) += dd_s;
      e.hessian.block(0, s_idx, 1 + p, 1) += d_eta_s * u;
      e.hessian.block(s_idx, 0, 1, 1 + p) += d_eta_s * u.transpose();
    }
  }
  return e;
}

// ---------------------------------------------------------------------------
// Fit

double ParametricFit::location(const CovariateValues& x) const {
  if (coefficients.size() == 0) return intercept;
  return intercept + (encoding.encode(x) - encoding.means()).dot(coefficients);
}

double ParametricFit::median(const CovariateValues& x) const {
  return std::exp(location(x) + scale * error_median(distribution));
}

ParametricFit fit_parametric(const SurvivalDataset& data, const ColumnRoles& roles, Distribution dist,
                             const ParametricOptions& options) {
  if (roles.strata) throw ValidationError("parametric models do not support strata");
  ParametricFit fit;
  fit.roles = roles;
  fit.distribution = dist;
  fit.options = options;
  fit.covariates = options.covariates.value_or(roles.covariates());
  fit.encoding = DesignEncoding(data, fit.covariates);
  const Eigen::MatrixXd centered = fit.encoding.encode(data).rowwise() - fit.encoding.means().transpose();
  if (fit.encoding.width() > 0) require_full_rank(centered, fit.encoding.column_names());

  const auto events = data.event_indicator(roles.cause_of_interest);
  if (std::none_of(events.begin(), events.end(), [](int e) { return e != 0; })) {
    throw ValidationError("no events of cause " + std::to_string(roles.cause_of_interest));
  }

  std::vector<double> time = data.time();
  double min_positive = std::numeric_limits<double>::infinity();
  for (double t : time) {
    if (t > 0.0) min_positive = std::min(min_positive, t);
  }
  if (!std::isfinite(min_positive)) throw ValidationError("all survival times are zero");
  for (double& t : time) {
    if (t == 0.0) {
      t = 0.5 * min_positive;
      fit.zero_time_shift = t;
      ++fit.shifted_rows;
    }
  }

  std::optional<double> fixed = options.fixed_scale;
  if (dist == Distribution::exponential) fixed = 1.0;
  fit.scale_fixed = fixed.has_value();
  AftLikelihood lik(dist, centered, time, events, fixed);

  // Start: intercept = mean log event time, slopes 0, log sigma = log sd of log event times.
  std::vector<double> log_events;
  for (std::size_t i = 0; i < time.size(); ++i) {
    if (events[i] != 0) log_events.push_back(std::log(time[i]));
  }
  double mean = 0.0;
  for (double v : log_events) mean += v;
  mean /= static_cast<double>(log_events.size());
  double var = 0.0;
  for (double v : log_events) var += (v - mean) * (v - mean);
  const double sd = log_events.size() > 1 ? std::sqrt(var / static_cast<double>(log_events.size() - 1)) : 0.0;

  Eigen::VectorXd start = Eigen::VectorXd::Zero(lik.dimension());
  start(0) = mean;
  if (lik.scale_is_free()) start(lik.dimension() - 1) = sd > 0.0 ? std::log(sd) : 0.0;

  const Eigen::Index p = static_cast<Eigen::Index>(fit.encoding.width());
  const Eigen::VectorXd scales = fit.encoding.scales();
  NewtonOptions newton;
  newton.max_iter = options.max_iter;
  newton.tol = options.tol;
  newton.on_accept = [&](const Eigen::VectorXd& theta) {
    check_divergence(theta.segment(1, p), scales);
    if (lik.scale_is_free() && !(std::abs(theta(lik.dimension() - 1)) <= 30.0)) {
      throw NonconvergenceError("nonconvergence: scale parameter diverged");
    }
  };
  auto result = newton_maximize([&](const Eigen::VectorXd& th) { return lik.evaluate(th); }, start, newton);
  if (!result.converged) {
    throw NonconvergenceError(std::string("nonconvergence: ") + to_string(dist) + " fit did not converge in " +
                              std::to_string(options.max_iter) + " iterations");
  }
  fit.intercept = result.x(0);
  fit.coefficients = result.x.segment(1, p);
  fit.scale = fixed ? *fixed : std::exp(result.x(lik.dimension() - 1));
  fit.loglik = result.at_optimum.value;
  fit.loglik_trace = result.trace;
  fit.iterations = result.iterations;
  fit.converged = true;
  fit.covariance = (-result.at_optimum.hessian).inverse();
  fit.covariance = 0.5 * (fit.covariance + fit.covariance.transpose()).eval();
  if (p > 0) check_infinite_coefficients(fit.covariance.block(1, 1, p, p), scales);
  return fit;
}

Prediction predict_survival_parametric(const ParametricFit& fit, const CovariateValues& x,
                                       std::span<const double> times) {
  const double mu = fit.location(x);
  Prediction p;
  p.values.reserve(times.size());
  for (double t : times) {
    if (t <= 0.0) {
      p.values.push_back(1.0);
    } else {
      const double z = (std::log(t) - mu) / fit.scale;
      p.values.push_back(std::clamp(standard_survival(fit.distribution, z), 0.0, 1.0));
    }
    p.extrapolated.push_back(false);
  }
  return p;
}

Prediction ParametricModel::predict(const CovariateValues& x, std::span<const double> times,
                                    const std::optional<std::string>& stratum) const {
  if (stratum) throw ValidationError("stratum given for an unstratified fit");
  return predict_survival_parametric(fit_, x, times);
}

double ParametricModel::risk_score(const CovariateValues& x, const std::optional<std::string>&, double) const {
  return -fit_.median(x);
}

std::unique_ptr<SurvivalModel> ParametricModel::refit(const SurvivalDataset& data) const {
  return std::make_unique<ParametricModel>(fit_parametric(data, fit_.roles, fit_.distribution, fit_.options));
}

}  // namespace survcontour
