#include "survcontour/step_function.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "survcontour/error.hpp"

namespace survcontour {

StepFunction::StepFunction(std::vector<double> knots, std::vector<double> values, double initial)
    : knots_(std::move(knots)), values_(std::move(values)), initial_(initial) {
  if (knots_.size() != values_.size()) {
    throw ValidationError("step function: knots and values differ in length");
  }
  for (std::size_t k = 1; k < knots_.size(); ++k) {
    if (!(knots_[k - 1] < knots_[k])) {
      throw ValidationError("step function: knots must be strictly ascending");
    }
  }
}

double StepFunction::operator()(double t) const {
  auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
  if (it == knots_.begin()) return initial_;
  return values_[static_cast<std::size_t>(it - knots_.begin()) - 1];
}

double StepFunction::left_limit(double t) const {
  auto it = std::lower_bound(knots_.begin(), knots_.end(), t);
  if (it == knots_.begin()) return initial_;
  return values_[static_cast<std::size_t>(it - knots_.begin()) - 1];
}

std::vector<double> StepFunction::evaluate(std::span<const double> times) const {
  std::vector<double> out;
  out.reserve(times.size());
  for (double t : times) out.push_back((*this)(t));
  return out;
}

double StepFunction::last_knot() const {
  return knots_.empty() ? -std::numeric_limits<double>::infinity() : knots_.back();
}

}  // namespace survcontour
