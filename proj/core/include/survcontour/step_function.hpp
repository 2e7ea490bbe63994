#pragma once

#include <span>
#include <vector>

namespace survcontour {

// Right-continuous step function: f(t) = values[k] for knots[k] <= t < knots[k+1],
// and f(t) = initial for t < knots[0]. Knots are strictly ascending.
class StepFunction {
 public:
  StepFunction() = default;
  StepFunction(std::vector<double> knots, std::vector<double> values, double initial);

  double operator()(double t) const;
  // Left limit f(t-).
  double left_limit(double t) const;
  std::vector<double> evaluate(std::span<const double> times) const;

  const std::vector<double>& knots() const noexcept { return knots_; }
  const std::vector<double>& values() const noexcept { return values_; }
  double initial() const noexcept { return initial_; }
  bool empty() const noexcept { return knots_.empty(); }
  std::size_t size() const noexcept { return knots_.size(); }
  double last_knot() const;

  bool operator==(const StepFunction&) const = default;

 private:
  std::vector<double> knots_;
  std::vector<double> values_;
  double initial_ = 0.0;
};

}  // namespace survcontour
