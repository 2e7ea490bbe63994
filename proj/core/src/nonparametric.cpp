#include "survcontour/nonparametric.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "survcontour/error.hpp"

namespace survcontour {

namespace {

struct TimeGroup {
  double time;
  double at_risk;    // #{T >= time}
  double events;     // status != 0 at time
  double censored;   // status == 0 at time
  std::vector<double> by_cause;  // only filled when requested
};

// Distinct observed times ascending with risk-set sizes.
std::vector<TimeGroup> group_times(std::span<const double> times, std::span<const int> status, int max_cause = 0) {
  if (times.size() != status.size()) throw ValidationError("times and status differ in length");
  if (times.empty()) throw ValidationError("estimator needs at least one observation");
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!(times[i] >= 0.0) || !std::isfinite(times[i])) throw ValidationError("times must be finite and non-negative");
    if (status[i] < 0) throw ValidationError("status codes must be non-negative");
  }
  std::vector<std::size_t> order(times.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return times[a] < times[b]; });

  std::vector<TimeGroup> groups;
  double remaining = static_cast<double>(times.size());
  std::size_t i = 0;
  while (i < order.size()) {
    TimeGroup g{times[order[i]], remaining, 0.0, 0.0, {}};
    if (max_cause > 0) g.by_cause.assign(static_cast<std::size_t>(max_cause), 0.0);
    while (i < order.size() && times[order[i]] == g.time) {
      const int s = status[order[i]];
      if (s == 0) {
        g.censored += 1.0;
      } else {
        g.events += 1.0;
        if (max_cause > 0) g.by_cause[static_cast<std::size_t>(s - 1)] += 1.0;
      }
      ++i;
    }
    remaining -= g.events + g.censored;
    groups.push_back(std::move(g));
  }
  return groups;
}

}  // namespace

KMEstimate kaplan_meier(std::span<const double> times, std::span<const int> status) {
  const auto groups = group_times(times, status);
  KMEstimate est;
  std::vector<double> knots, values;
  double surv = 1.0;
  double greenwood_sum = 0.0;
  for (const auto& g : groups) {
    if (g.events == 0.0) continue;
    surv *= 1.0 - g.events / g.at_risk;
    // Greenwood term is infinite when everyone at risk fails; the variance of a zero
    // survival estimate is recorded as 0.
    double var = 0.0;
    if (g.at_risk > g.events) {
      greenwood_sum += g.events / (g.at_risk * (g.at_risk - g.events));
      var = surv * surv * greenwood_sum;
    }
    knots.push_back(g.time);
    values.push_back(surv);
    est.greenwood_variance.push_back(var);
    est.at_risk.push_back(g.at_risk);
    est.events.push_back(g.events);
  }
  est.all_censored = knots.empty();
  est.survival = StepFunction(std::move(knots), std::move(values), 1.0);
  return est;
}

StepFunction nelson_aalen(std::span<const double> times, std::span<const int> status) {
  const auto groups = group_times(times, status);
  std::vector<double> knots, values;
  double cumhaz = 0.0;
  for (const auto& g : groups) {
    if (g.events == 0.0) continue;
    cumhaz += g.events / g.at_risk;
    knots.push_back(g.time);
    values.push_back(cumhaz);
  }
  return StepFunction(std::move(knots), std::move(values), 0.0);
}

StepFunction censoring_km(std::span<const double> times, std::span<const int> status) {
  const auto groups = group_times(times, status);
  std::vector<double> knots, values;
  double surv = 1.0;
  for (const auto& g : groups) {
    if (g.censored == 0.0) continue;
    const double at_risk = g.at_risk - g.events;
    surv *= 1.0 - g.censored / at_risk;
    knots.push_back(g.time);
    values.push_back(surv);
  }
  return StepFunction(std::move(knots), std::move(values), 1.0);
}

AalenJohansenEstimate aalen_johansen(std::span<const double> times, std::span<const int> status, int max_cause) {
  if (max_cause < 1) throw ValidationError("aalen_johansen: max_cause must be >= 1");
  for (int s : status) {
    if (s < 0 || s > max_cause) {
      throw ValidationError("aalen_johansen: unknown cause code " + std::to_string(s));
    }
  }
  const auto groups = group_times(times, status, max_cause);
  const auto k_causes = static_cast<std::size_t>(max_cause);
  std::vector<double> knots;
  std::vector<std::vector<double>> cif_values(k_causes);
  std::vector<double> surv_values;
  std::vector<double> cif(k_causes, 0.0);
  double surv = 1.0;
  for (const auto& g : groups) {
    if (g.events == 0.0) continue;
    for (std::size_t k = 0; k < k_causes; ++k) {
      cif[k] += surv * g.by_cause[k] / g.at_risk;
      cif_values[k].push_back(cif[k]);
    }
    surv *= 1.0 - g.events / g.at_risk;
    knots.push_back(g.time);
    surv_values.push_back(surv);
  }
  AalenJohansenEstimate est;
  for (std::size_t k = 0; k < k_causes; ++k) est.cif.emplace_back(knots, std::move(cif_values[k]), 0.0);
  est.overall_survival = StepFunction(std::move(knots), std::move(surv_values), 1.0);
  return est;
}

MedianSplitKM median_split_km(const SurvivalDataset& data) { return median_split_km(data, data.roles()); }

MedianSplitKM median_split_km(const SurvivalDataset& data, const ColumnRoles& roles) {
  const auto& x = data.column(roles.predictor).values();
  const double cutoff = lower_median(x);
  const auto events = data.event_indicator(roles.cause_of_interest);
  std::vector<double> t_low, t_high;
  std::vector<int> s_low, s_high;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] <= cutoff) {
      t_low.push_back(data.time()[i]);
      s_low.push_back(events[i]);
    } else {
      t_high.push_back(data.time()[i]);
      s_high.push_back(events[i]);
    }
  }
  if (t_high.empty()) throw ValidationError("degenerate split: predictor '" + roles.predictor + "' is constant");
  MedianSplitKM out;
  out.cutoff = cutoff;
  out.predictor = roles.predictor;
  out.low = kaplan_meier(t_low, s_low);
  out.high = kaplan_meier(t_high, s_high);
  out.n_low = t_low.size();
  out.n_high = t_high.size();
  return out;
}

}  // namespace survcontour
