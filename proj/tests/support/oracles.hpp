#pragma once

// Deliberately naive reference implementations. They share no code with the engine beyond the
// dataset container, so agreement is evidence rather than tautology.

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "survcontour/dataset.hpp"

namespace oracle {

// Exact log partial likelihood by explicit risk-set enumeration; ties by Breslow or Efron.
double partial_loglik(const std::vector<std::vector<double>>& x, const std::vector<double>& time,
                      const std::vector<int>& event, const std::vector<double>& beta, bool efron);

// Argmax of f on lo, lo + step, ..., hi.
double grid_argmax(const std::function<double(double)>& f, double lo, double hi, double step);

// Fine-Gray weighted log partial likelihood (Breslow) with naive censoring KM weights.
double fine_gray_loglik(const std::vector<std::vector<double>>& x, const std::vector<double>& time,
                        const std::vector<int>& status, int cause, const std::vector<double>& beta);

// Censoring survival G(t) and its left limit by direct product over distinct times, events first.
double censoring_survival(const std::vector<double>& time, const std::vector<int>& status, double t, bool left_limit);

double kaplan_meier(const std::vector<double>& time, const std::vector<int>& event, double t);
double nelson_aalen(const std::vector<double>& time, const std::vector<int>& event, double t);
// Cumulative incidence of cause k by the explicit Aalen-Johansen sum.
double cumulative_incidence(const std::vector<double>& time, const std::vector<int>& status, int cause, double t);

struct PairCount {
  double c_index = 0.0;
  std::size_t comparable = 0;
};
// Every ordered pair enumerated.
PairCount brute_c_index(const std::vector<double>& time, const std::vector<int>& event,
                        const std::vector<double>& score);

// Brier curve and trapezoid integral straight from the IPCW formula.
struct BrierOracle {
  std::vector<double> scores;
  double integrated = 0.0;
};
BrierOracle brier(const std::vector<std::vector<double>>& event_free, const std::vector<double>& time,
                  const std::vector<int>& status, const std::vector<double>& grid, int cause);

// Two-sample log-rank chi-square (O - E)^2 / V for group membership.
double logrank(const std::vector<double>& time, const std::vector<int>& event, const std::vector<bool>& group);

// Random right-censored data helpers.
struct Sample {
  std::vector<double> time;
  std::vector<int> status;
  std::vector<std::vector<double>> x;  // row-major covariates
};

// Exponential event times with hazard exp(x'beta), independent uniform censoring; distinct times
// when `distinct` (continuous draws practically never tie).
Sample simulate(std::mt19937_64& rng, std::size_t n, const std::vector<double>& beta, double censor_rate,
                int causes = 1, bool integer_times = false);

// Dataset with columns x0, x1, ... and roles time/status with x0 as predictor.
survcontour::SurvivalDataset to_dataset(const Sample& s, std::optional<std::vector<std::string>> strata = {});
survcontour::ColumnRoles roles_for(std::size_t p, bool strata = false, int cause = 1);

// Writes a dataset's role columns to CSV text.
std::string to_csv(const Sample& s, const std::vector<std::string>& strata = {});

}  // namespace oracle
