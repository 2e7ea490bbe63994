#include <gtest/gtest.h>

#include <cmath>

#include "survcontour/error.hpp"
#include "survcontour/optimize.hpp"

using namespace survcontour;

namespace {

Evaluation concave_quadratic(const Eigen::VectorXd& x) {
  Eigen::MatrixXd a(2, 2);
  a << 2.0, 0.5, 0.5, 1.0;
  Eigen::VectorXd c(2);
  c << 1.0, -2.0;
  Evaluation e;
  const Eigen::VectorXd d = x - c;
  e.value = -0.5 * d.dot(a * d);
  e.gradient = -a * d;
  e.hessian = -a;
  return e;
}

// log(1 + e^x) - 0.3 x style objective with a unique maximum at logit(0.3) after negation.
Evaluation logistic(const Eigen::VectorXd& x) {
  Evaluation e;
  const double v = x(0);
  const double p = 1.0 / (1.0 + std::exp(-v));
  e.value = 0.3 * v - std::log1p(std::exp(v));
  e.gradient = Eigen::VectorXd::Constant(1, 0.3 - p);
  e.hessian = Eigen::MatrixXd::Constant(1, 1, -p * (1.0 - p));
  return e;
}

}  // namespace

TEST(Newton, QuadraticInOneStep) {
  NewtonOptions o;
  const auto r = newton_maximize(concave_quadratic, Eigen::VectorXd::Zero(2), o);
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.x(0), 1.0, 1e-12);
  EXPECT_NEAR(r.x(1), -2.0, 1e-12);
  EXPECT_LE(r.iterations, 3);
}

TEST(Newton, TraceNeverDecreases) {
  NewtonOptions o;
  const auto r = newton_maximize(logistic, Eigen::VectorXd::Constant(1, 8.0), o);
  ASSERT_TRUE(r.converged);
  EXPECT_NEAR(r.x(0), std::log(0.3 / 0.7), 1e-8);
  for (std::size_t k = 1; k < r.trace.size(); ++k) EXPECT_GE(r.trace[k], r.trace[k - 1]);
}

TEST(Newton, IterationCapReportsNonconvergence) {
  NewtonOptions o;
  o.max_iter = 1;
  const auto r = newton_maximize(logistic, Eigen::VectorXd::Constant(1, 30.0), o);
  EXPECT_FALSE(r.converged);
}

TEST(Newton, CallbackCanAbort) {
  NewtonOptions o;
  o.on_accept = [](const Eigen::VectorXd& x) {
    if (x(0) > 0.5) throw NonconvergenceError("cap");
  };
  EXPECT_THROW(newton_maximize(concave_quadratic, Eigen::VectorXd::Zero(2), o), NonconvergenceError);
}

TEST(FiniteDifference, MatchesAnalyticGradient) {
  Eigen::VectorXd x(2);
  x << 0.3, 0.7;
  const auto g = finite_difference_gradient([](const Eigen::VectorXd& v) { return concave_quadratic(v).value; }, x);
  EXPECT_NEAR((g - concave_quadratic(x).gradient).norm(), 0.0, 1e-8);
}
