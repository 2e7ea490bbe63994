#pragma once

#include <span>
#include <string>
#include <vector>

#include "survcontour/dataset.hpp"
#include "survcontour/step_function.hpp"

namespace survcontour {

// Product-limit estimate. One entry per distinct observed time that carries an event.
struct KMEstimate {
  StepFunction survival;
  std::vector<double> greenwood_variance;
  std::vector<double> at_risk;
  std::vector<double> events;
  // True when the input had no events (survival is identically 1).
  bool all_censored = false;
};

// Status is 0 (censored) or nonzero (event). Censorings tied with an event remain at risk.
KMEstimate kaplan_meier(std::span<const double> times, std::span<const int> status);

// Cumulative hazard sum_{t_i <= t} d_i / n_i.
StepFunction nelson_aalen(std::span<const double> times, std::span<const int> status);

// Censoring survival G(t): censorings are the events; at a shared time every event is
// taken to occur before every censoring, so events leave the censoring risk set first.
StepFunction censoring_km(std::span<const double> times, std::span<const int> status);

struct AalenJohansenEstimate {
  // cif[k - 1] is the cumulative incidence for cause k = 1..K.
  std::vector<StepFunction> cif;
  StepFunction overall_survival;
};

// Status codes 0..max_cause; any other code is an error.
AalenJohansenEstimate aalen_johansen(std::span<const double> times, std::span<const int> status, int max_cause);

struct MedianSplitKM {
  double cutoff = 0.0;
  std::string predictor;
  KMEstimate low;
  KMEstimate high;
  std::size_t n_low = 0;
  std::size_t n_high = 0;
};

// Splits at the lower median of the predictor; ties go to the low group. Event = cause of interest.
MedianSplitKM median_split_km(const SurvivalDataset& data, const ColumnRoles& roles);
MedianSplitKM median_split_km(const SurvivalDataset& data);

}  // namespace survcontour
