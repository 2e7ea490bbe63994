#include "survcontour/optimize.hpp"

#include <cmath>

namespace survcontour {

namespace {

bool finite(const Evaluation& e) {
  return std::isfinite(e.value) && e.gradient.allFinite() && e.hessian.allFinite();
}

Eigen::VectorXd newton_direction(const Evaluation& e) {
  const Eigen::MatrixXd info = -e.hessian;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
  const auto positive = [](const Eigen::LDLT<Eigen::MatrixXd>& f) {
    return f.info() == Eigen::Success && f.isPositive() && (f.vectorD().array() > 0.0).all();
  };
  if (positive(ldlt)) return ldlt.solve(e.gradient);
  const auto n = info.rows();
  double shift = 1e-6 * std::max(1.0, info.diagonal().cwiseAbs().maxCoeff());
  for (int k = 0; k < 60; ++k) {
    ldlt.compute(info + shift * Eigen::MatrixXd::Identity(n, n));
    if (positive(ldlt)) return ldlt.solve(e.gradient);
    shift *= 10.0;
  }
  return e.gradient;
}

}  // namespace

NewtonResult newton_maximize(const Objective& objective, Eigen::VectorXd start, const NewtonOptions& options) {
  NewtonResult result;
  result.x = std::move(start);
  result.at_optimum = objective(result.x);
  if (!finite(result.at_optimum)) return result;
  result.trace.push_back(result.at_optimum.value);

  const auto sup = [](const Eigen::VectorXd& g) { return g.size() == 0 ? 0.0 : g.cwiseAbs().maxCoeff(); };
  // Undamped step judged by the score, with a rounding-level slack on the value: near the optimum
  // the gain in the objective drowns in rounding. Such steps stay out of the trace.
  const auto polish = [&] {
    const Eigen::VectorXd candidate = result.x + newton_direction(result.at_optimum);
    Evaluation next = objective(candidate);
    const double slack = 1e-12 * std::max(1.0, std::abs(result.at_optimum.value));
    if (!finite(next) || next.value < result.at_optimum.value - slack ||
        !(sup(next.gradient) < sup(result.at_optimum.gradient))) {
      return false;
    }
    if (options.on_accept) options.on_accept(candidate);
    result.x = candidate;
    result.at_optimum = std::move(next);
    return true;
  };

  for (int iter = 0; iter < options.max_iter; ++iter) {
    const Evaluation& cur = result.at_optimum;
    if (sup(cur.gradient) < options.score_tol) break;
    const Eigen::VectorXd direction = newton_direction(cur);

    double step = 1.0;
    bool accepted = false;
    Eigen::VectorXd candidate;
    Evaluation next;
    for (int h = 0; h <= options.max_halvings; ++h) {
      candidate = result.x + step * direction;
      next = objective(candidate);
      if (finite(next) && next.value >= cur.value) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (!polish()) break;
      result.iterations = iter + 1;
      continue;
    }

    if (options.on_accept) options.on_accept(candidate);
    const double change = std::abs(next.value - cur.value);
    const double scale = std::max(1.0, std::abs(next.value));
    result.x = std::move(candidate);
    result.at_optimum = std::move(next);
    result.trace.push_back(result.at_optimum.value);
    result.iterations = iter + 1;

    const double g = sup(result.at_optimum.gradient);
    if (g < options.score_tol) break;
    if (change <= options.tol * scale && g < options.accept_score) break;
  }
  result.converged = sup(result.at_optimum.gradient) < options.accept_score;
  if (result.converged && sup(result.at_optimum.gradient) > 0.0) polish();
  return result;
}

Eigen::VectorXd finite_difference_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                           const Eigen::VectorXd& x, double step) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    Eigen::VectorXd up = x, down = x;
    up(j) += step;
    down(j) -= step;
    g(j) = (f(up) - f(down)) / (2.0 * step);
  }
  return g;
}

}  // namespace survcontour
