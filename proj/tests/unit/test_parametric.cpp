#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "oracles.hpp"
#include "survcontour/error.hpp"
#include "survcontour/parametric.hpp"

using namespace survcontour;

namespace {

constexpr Distribution kFamilies[] = {Distribution::exponential, Distribution::weibull, Distribution::lognormal,
                                      Distribution::loglogistic};

ParametricOptions intercept_only() {
  ParametricOptions o;
  o.covariates = std::vector<std::string>{};
  return o;
}

}  // namespace

TEST(Parametric, ExponentialClosedForm) {
  std::mt19937_64 rng(31);
  for (int rep = 0; rep < 10; ++rep) {
    const auto s = oracle::simulate(rng, 50, {0.0}, 0.5);
    const auto data = oracle::to_dataset(s);
    const auto fit = fit_parametric(data, data.roles(), Distribution::exponential, intercept_only());
    const double total = std::accumulate(s.time.begin(), s.time.end(), 0.0);
    const double d = static_cast<double>(std::count(s.status.begin(), s.status.end(), 1));
    const double lambda = d / total;
    EXPECT_NEAR(fit.intercept, -std::log(lambda), 1e-10);
    EXPECT_NEAR(fit.loglik, d * std::log(lambda) - d, 1e-9);
    EXPECT_EQ(fit.scale, 1.0);
    const std::vector<double> at{1.0 / lambda};
    EXPECT_NEAR(predict_survival_parametric(fit, {}, at).values[0], std::exp(-1.0), 1e-10);
    const std::vector<double> fitted{std::exp(fit.intercept)};
    EXPECT_NEAR(predict_survival_parametric(fit, {}, fitted).values[0], std::exp(-1.0), 1e-12);
  }
}

TEST(Parametric, WeibullWithUnitScaleIsExponential) {
  std::mt19937_64 rng(32);
  const auto s = oracle::simulate(rng, 80, {0.5, -0.3}, 0.4);
  const auto data = oracle::to_dataset(s);
  ParametricOptions fixed;
  fixed.fixed_scale = 1.0;
  const auto w = fit_parametric(data, data.roles(), Distribution::weibull, fixed);
  const auto e = fit_parametric(data, data.roles(), Distribution::exponential);
  EXPECT_NEAR(w.intercept, e.intercept, 1e-10);
  EXPECT_LT((w.coefficients - e.coefficients).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_NEAR(w.loglik, e.loglik, 1e-10);
}

TEST(Parametric, LogNormalUncensoredMle) {
  std::mt19937_64 rng(33);
  const auto s = oracle::simulate(rng, 60, {0.0}, 0.0);
  const auto data = oracle::to_dataset(s);
  const auto fit = fit_parametric(data, data.roles(), Distribution::lognormal, intercept_only());
  double mean = 0.0;
  for (double t : s.time) mean += std::log(t);
  mean /= static_cast<double>(s.time.size());
  double ss = 0.0;
  for (double t : s.time) ss += (std::log(t) - mean) * (std::log(t) - mean);
  const double sigma = std::sqrt(ss / static_cast<double>(s.time.size()));
  EXPECT_NEAR(fit.intercept, mean, 1e-8);
  EXPECT_NEAR(fit.scale, sigma, 1e-8);
  EXPECT_NEAR(fit.median({}), std::exp(mean), 1e-7);
}

TEST(Parametric, AnalyticGradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(34);
  const auto s = oracle::simulate(rng, 60, {0.5, 0.2}, 0.5);
  Eigen::MatrixXd x(static_cast<Eigen::Index>(s.x.size()), 2);
  for (std::size_t i = 0; i < s.x.size(); ++i) x.row(static_cast<Eigen::Index>(i)) << s.x[i][0], s.x[i][1];
  std::vector<int> ev;
  for (int v : s.status) ev.push_back(v == 1);
  for (Distribution d : kFamilies) {
    AftLikelihood lik(d, x, s.time, ev, d == Distribution::exponential ? std::optional<double>(1.0) : std::nullopt);
    Eigen::VectorXd th = Eigen::VectorXd::Zero(lik.dimension());
    th(0) = 0.3;
    th(1) = -0.2;
    th(2) = 0.1;
    if (lik.scale_is_free()) th(3) = -0.3;
    const auto e = lik.evaluate(th);
    const auto f = [&](const Eigen::VectorXd& v) { return lik.log_likelihood(v); };
    EXPECT_LT((e.gradient - finite_difference_gradient(f, th)).cwiseAbs().maxCoeff(), 1e-5) << to_string(d);
    for (Eigen::Index j = 0; j < th.size(); ++j) {
      const auto gj = [&](const Eigen::VectorXd& v) { return lik.evaluate(v).gradient(j); };
      EXPECT_LT((e.hessian.row(j).transpose() - finite_difference_gradient(gj, th)).cwiseAbs().maxCoeff(), 1e-5)
          << to_string(d);
    }
  }
}

TEST(Parametric, MaximumIsLocalUnderPerturbation) {
  std::mt19937_64 rng(35);
  const auto s = oracle::simulate(rng, 100, {0.6}, 0.4);
  const auto data = oracle::to_dataset(s);
  Eigen::MatrixXd x(static_cast<Eigen::Index>(s.x.size()), 1);
  double mean = 0.0;
  for (const auto& r : s.x) mean += r[0];
  mean /= static_cast<double>(s.x.size());
  for (std::size_t i = 0; i < s.x.size(); ++i) x(static_cast<Eigen::Index>(i), 0) = s.x[i][0] - mean;
  std::vector<int> ev;
  for (int v : s.status) ev.push_back(v == 1);
  for (Distribution d : kFamilies) {
    const auto fit = fit_parametric(data, data.roles(), d);
    AftLikelihood lik(d, x, s.time, ev, fit.scale_fixed ? std::optional<double>(fit.scale) : std::nullopt);
    Eigen::VectorXd th(lik.dimension());
    th(0) = fit.intercept;
    th(1) = fit.coefficients(0);
    if (lik.scale_is_free()) th(2) = std::log(fit.scale);
    EXPECT_NEAR(lik.log_likelihood(th), fit.loglik, 1e-9);
    for (Eigen::Index j = 0; j < th.size(); ++j) {
      for (double h : {-1e-2, 1e-2}) {
        Eigen::VectorXd p = th;
        p(j) += h;
        EXPECT_LT(lik.log_likelihood(p), fit.loglik) << to_string(d);
      }
    }
  }
}

TEST(Parametric, TimeRescalingShiftsInterceptOnly) {
  std::mt19937_64 rng(36);
  const auto s = oracle::simulate(rng, 90, {0.4}, 0.4);
  auto scaled = s;
  const double c = 7.5;
  for (double& t : scaled.time) t *= c;
  const auto a = oracle::to_dataset(s);
  const auto b = oracle::to_dataset(scaled);
  const double d = static_cast<double>(std::count(s.status.begin(), s.status.end(), 1));
  for (Distribution dist : kFamilies) {
    const auto fa = fit_parametric(a, a.roles(), dist);
    const auto fb = fit_parametric(b, b.roles(), dist);
    EXPECT_NEAR(fb.intercept, fa.intercept + std::log(c), 1e-7) << to_string(dist);
    EXPECT_NEAR(fb.coefficients(0), fa.coefficients(0), 1e-7);
    EXPECT_NEAR(fb.scale, fa.scale, 1e-7);
    EXPECT_NEAR(fb.loglik, fa.loglik - d * std::log(c), 1e-6);
    for (double t : {0.1, 0.5, 1.0, 3.0}) {
      const std::vector<double> ta{t}, tb{c * t};
      const CovariateValues x{{"x0", 0.7}};
      EXPECT_NEAR(predict_survival_parametric(fa, x, ta).values[0], predict_survival_parametric(fb, x, tb).values[0],
                  1e-8);
    }
  }
}

TEST(Parametric, SurvivalIsMonotoneAndStartsAtOne) {
  std::mt19937_64 rng(37);
  const auto s = oracle::simulate(rng, 70, {0.4}, 0.4);
  const auto data = oracle::to_dataset(s);
  std::vector<double> times;
  for (double t = 0.0; t < 50.0; t += 0.1) times.push_back(t);
  for (Distribution d : kFamilies) {
    const ParametricModel model(fit_parametric(data, data.roles(), d));
    const auto p = model.predict({{"x0", 0.5}}, times, std::nullopt);
    EXPECT_EQ(p.values.front(), 1.0);
    for (std::size_t k = 1; k < times.size(); ++k) EXPECT_LE(p.values[k], p.values[k - 1]);
    // Positive hazard effect: larger x0 means a shorter median and a higher risk score.
    EXPECT_GT(model.risk_score({{"x0", 2.0}}, std::nullopt, 1.0), model.risk_score({{"x0", -2.0}}, std::nullopt, 1.0));
  }
}

TEST(Parametric, StandardSurvivalAtKnownPoints) {
  EXPECT_NEAR(standard_survival(Distribution::weibull, 0.0), std::exp(-1.0), 1e-15);
  EXPECT_NEAR(standard_survival(Distribution::lognormal, 0.0), 0.5, 1e-15);
  EXPECT_NEAR(standard_survival(Distribution::loglogistic, 0.0), 0.5, 1e-15);
  EXPECT_NEAR(standard_survival(Distribution::lognormal, 1.959963984540054), 0.025, 1e-12);
  EXPECT_GT(standard_survival(Distribution::lognormal, 40.0), 0.0 - 1e-300);
}

TEST(Parametric, ZeroTimesAreShifted) {
  ColumnRoles roles{"time", "status", "x", {}, std::nullopt, 1};
  const SurvivalDataset data(roles, {0.0, 1.0, 2.0, 3.0, 4.0, 6.0}, {1, 1, 0, 1, 1, 0},
                             {Column::continuous("x", {0.1, 0.5, 0.2, 0.9, 0.4, 0.3})});
  const auto fit = fit_parametric(data, roles, Distribution::weibull);
  EXPECT_EQ(fit.shifted_rows, 1u);
  EXPECT_EQ(fit.zero_time_shift, 0.5);
}

TEST(Parametric, RejectsStrataAndUnknownNames) {
  std::mt19937_64 rng(38);
  const auto s = oracle::simulate(rng, 30, {0.3}, 0.4);
  const auto strat = oracle::to_dataset(s, std::vector<std::string>(s.time.size(), "a"));
  EXPECT_THROW(fit_parametric(strat, strat.roles(), Distribution::weibull), ValidationError);
  EXPECT_THROW(parse_distribution("gamma"), ValidationError);
  EXPECT_EQ(parse_distribution("loglogistic"), Distribution::loglogistic);
}
