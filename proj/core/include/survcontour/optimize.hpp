#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace survcontour {

// Objective value with analytic first and second derivatives.
struct Evaluation {
  double value = 0.0;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;
};

using Objective = std::function<Evaluation(const Eigen::VectorXd&)>;

struct NewtonOptions {
  int max_iter = 25;
  // Relative objective change for convergence.
  double tol = 1e-9;
  // Gradient sup-norm that counts as converged on its own.
  double score_tol = 1e-9;
  // Gradient sup-norm every converged fit must reach.
  double accept_score = 1e-6;
  int max_halvings = 10;
  // Called on every accepted iterate; throws to abort (e.g. divergence cap).
  std::function<void(const Eigen::VectorXd&)> on_accept;
};

struct NewtonResult {
  Eigen::VectorXd x;
  Evaluation at_optimum;
  int iterations = 0;
  bool converged = false;
  std::vector<double> trace;  // objective at every accepted iterate, starting point first (rounding-level polish steps excluded)
};

// Maximizes a twice-differentiable objective by Newton-Raphson with step halving. Accepted iterates
// never decrease the objective. Indefinite Hessians are shifted towards the identity until the
// Newton system is positive definite.
NewtonResult newton_maximize(const Objective& objective, Eigen::VectorXd start, const NewtonOptions& options);

// Central finite-difference gradient, used by the derivative checks.
Eigen::VectorXd finite_difference_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                           const Eigen::VectorXd& x, double step = 1e-5);

}  // namespace survcontour
