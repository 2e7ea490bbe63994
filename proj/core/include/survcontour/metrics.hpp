#pragma once

#include <optional>
#include <span>
#include <vector>

#include "survcontour/dataset.hpp"
#include "survcontour/model.hpp"
#include "survcontour/step_function.hpp"

namespace survcontour {

struct Concordance {
  double c_index = 0.5;
  std::size_t comparable_pairs = 0;
  std::size_t concordant_pairs = 0;
  std::size_t tied_pairs = 0;  // comparable pairs with equal scores
};

// Harrell's C. A pair is comparable when the shorter time carries an event; it is concordant when
// that subject has the higher score; equal scores count one half. O(n log n).
Concordance c_index(std::span<const double> times, std::span<const int> event, std::span<const double> scores);

struct BrierCurve {
  std::vector<double> times;
  std::vector<double> scores;
  double integrated = 0.0;
  double tau = 0.0;
};

// IPCW Brier score of event-free predictions. predictions[i][k] is the predicted probability that
// subject i is free of the cause of interest at grid[k]. grid is ascending, starts at 0 and ends at
// tau. Subjects failing from any cause before t carry weight 1 / G(T_i-), subjects still at risk
// 1 / G(t); the observed status is 1 unless the subject failed from the cause of interest by t.
// With a single cause this is the usual Brier score of survival predictions.
BrierCurve integrated_brier(const std::vector<std::vector<double>>& predictions, std::span<const double> times,
                            std::span<const int> status, std::span<const double> grid, const StepFunction& censoring,
                            int cause = 1);

// Largest event time at which the censoring survival still exceeds 0.05.
double default_tau(std::span<const double> times, std::span<const int> status, const StepFunction& censoring);

struct MetricsOptions {
  std::optional<double> tau;
  // Evaluation points of the Brier curve, including 0 and tau.
  std::size_t max_grid = 100;
};

struct MetricsReport {
  std::string family;
  Concordance concordance;
  BrierCurve brier;
};

// Apparent (in-sample) C-index of model.risk_score and IBS of its predictions on data.
MetricsReport evaluate_model(const SurvivalModel& model, const SurvivalDataset& data, const MetricsOptions& options = {});

}  // namespace survcontour
