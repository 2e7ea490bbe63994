#include "survcontour/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "survcontour/design.hpp"
#include "survcontour/error.hpp"
#include "survcontour/nonparametric.hpp"

namespace survcontour {

namespace {

class Fenwick {
 public:
  explicit Fenwick(std::size_t n) : tree_(n + 1, 0) {}
  void add(std::size_t i) {
    for (++i; i < tree_.size(); i += i & (~i + 1)) ++tree_[i];
  }
  // Number of inserted entries with index < i.
  std::size_t prefix(std::size_t i) const {
    std::size_t total = 0;
    for (; i > 0; i -= i & (~i + 1)) total += tree_[i];
    return total;
  }

 private:
  std::vector<std::size_t> tree_;
};

std::vector<double> thin(const std::vector<double>& sorted, std::size_t limit) {
  if (sorted.size() <= limit || limit < 2) return sorted;
  std::vector<double> out;
  out.reserve(limit);
  const double step = static_cast<double>(sorted.size() - 1) / static_cast<double>(limit - 1);
  for (std::size_t k = 0; k < limit; ++k) {
    const auto idx = static_cast<std::size_t>(std::llround(static_cast<double>(k) * step));
    if (out.empty() || sorted[idx] != out.back()) out.push_back(sorted[idx]);
  }
  return out;
}

}  // namespace

Concordance c_index(std::span<const double> times, std::span<const int> event, std::span<const double> scores) {
  const std::size_t n = times.size();
  if (event.size() != n || scores.size() != n) throw ValidationError("c_index: inputs differ in length");

  std::vector<double> distinct(scores.begin(), scores.end());
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  std::vector<std::size_t> rank(n);
  for (std::size_t i = 0; i < n; ++i) {
    rank[i] = static_cast<std::size_t>(std::lower_bound(distinct.begin(), distinct.end(), scores[i]) - distinct.begin());
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return times[a] > times[b]; });

  Fenwick later(distinct.size());
  std::size_t inserted = 0;
  Concordance c;
  for (std::size_t g = 0; g < n;) {
    std::size_t end = g;
    while (end < n && times[order[end]] == times[order[g]]) ++end;
    for (std::size_t k = g; k < end; ++k) {
      const std::size_t i = order[k];
      if (event[i] == 0) continue;
      const std::size_t below = later.prefix(rank[i]);
      const std::size_t equal = later.prefix(rank[i] + 1) - below;
      c.comparable_pairs += inserted;
      c.concordant_pairs += below;
      c.tied_pairs += equal;
    }
    for (std::size_t k = g; k < end; ++k) later.add(rank[order[k]]);
    inserted += end - g;
    g = end;
  }
  if (c.comparable_pairs == 0) throw ValidationError("c_index: no comparable pairs");
  c.c_index = (static_cast<double>(c.concordant_pairs) + 0.5 * static_cast<double>(c.tied_pairs)) /
              static_cast<double>(c.comparable_pairs);
  return c;
}

BrierCurve integrated_brier(const std::vector<std::vector<double>>& predictions, std::span<const double> times,
                            std::span<const int> status, std::span<const double> grid, const StepFunction& censoring,
                            int cause) {
  const std::size_t n = times.size();
  if (predictions.size() != n || status.size() != n) throw ValidationError("integrated_brier: inputs differ in length");
  if (grid.size() < 2 || grid.front() != 0.0) throw ValidationError("integrated_brier: grid must start at 0 and reach tau");
  for (std::size_t k = 1; k < grid.size(); ++k) {
    if (!(grid[k] > grid[k - 1])) throw ValidationError("integrated_brier: grid must be strictly ascending");
  }
  for (const auto& row : predictions) {
    if (row.size() != grid.size()) throw ValidationError("integrated_brier: prediction rows must match the grid");
  }
  const char* exhausted = "censoring support exhausted; shrink tau";

  BrierCurve curve;
  curve.tau = grid.back();
  curve.times.assign(grid.begin(), grid.end());
  curve.scores.reserve(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double t = grid[k];
    const double g_t = censoring(t);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double weight = 0.0;
      double observed = 1.0;
      if (times[i] > t) {
        if (g_t <= 0.0) throw ValidationError(exhausted);
        weight = 1.0 / g_t;
      } else if (status[i] != 0) {
        const double g_i = censoring.left_limit(times[i]);
        if (g_i <= 0.0) throw ValidationError(exhausted);
        weight = 1.0 / g_i;
        observed = status[i] == cause ? 0.0 : 1.0;
      }
      if (weight == 0.0) continue;
      const double r = observed - predictions[i][k];
      total += weight * r * r;
    }
    curve.scores.push_back(total / static_cast<double>(n));
  }
  double area = 0.0;
  for (std::size_t k = 1; k < grid.size(); ++k) {
    area += 0.5 * (curve.scores[k] + curve.scores[k - 1]) * (grid[k] - grid[k - 1]);
  }
  curve.integrated = area / curve.tau;
  return curve;
}

double default_tau(std::span<const double> times, std::span<const int> status, const StepFunction& censoring) {
  double tau = -1.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (status[i] != 0 && times[i] > tau && censoring(times[i]) > 0.05) tau = times[i];
  }
  if (tau <= 0.0) throw ValidationError("censoring support exhausted; shrink tau");
  return tau;
}

MetricsReport evaluate_model(const SurvivalModel& model, const SurvivalDataset& data, const MetricsOptions& options) {
  const ColumnRoles& roles = model.roles();
  const auto& times = data.time();
  const auto& status = data.status();
  const StepFunction censoring = censoring_km(times, status);
  const double tau = options.tau.value_or(default_tau(times, status, censoring));
  if (!(tau > 0.0)) throw ValidationError("tau must be positive");

  std::vector<double> event_times;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (status[i] != 0 && times[i] > 0.0 && times[i] < tau) event_times.push_back(times[i]);
  }
  std::sort(event_times.begin(), event_times.end());
  event_times.erase(std::unique(event_times.begin(), event_times.end()), event_times.end());
  std::vector<double> grid{0.0};
  for (double t : thin(event_times, options.max_grid > 2 ? options.max_grid - 2 : 0)) grid.push_back(t);
  grid.push_back(tau);

  const auto covariates = roles.covariates();
  const Column* strata = roles.strata ? &data.column(*roles.strata) : nullptr;
  const bool cif = model.outcome_kind() == OutcomeKind::cif;
  std::vector<std::vector<double>> predictions(data.size());
  std::vector<double> scores(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const CovariateValues x = row_values(data, i, covariates);
    std::optional<std::string> stratum;
    if (strata) stratum = strata->level_at(i);
    auto p = model.predict(x, grid, stratum).values;
    if (cif) {
      for (double& v : p) v = 1.0 - v;
    }
    predictions[i] = std::move(p);
    scores[i] = model.risk_score(x, stratum, tau);
  }

  MetricsReport report;
  report.family = model.family();
  report.concordance = c_index(times, data.event_indicator(roles.cause_of_interest), scores);
  report.brier = integrated_brier(predictions, times, status, grid, censoring, roles.cause_of_interest);
  return report;
}

}  // namespace survcontour
