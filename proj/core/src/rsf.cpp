#include "survcontour/rsf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "survcontour/bootstrap.hpp"
#include "survcontour/error.hpp"
#include "survcontour/metrics.hpp"
#include "survcontour/rng.hpp"

namespace survcontour {

namespace {

// Scores every admissible split of one variable. on_candidate(threshold, level, statistic) is called
// in ascending value order (continuous) or level order (categorical).
template <class OnCandidate>
void scan_variable(std::span<const double> values, bool categorical, std::span<const double> time,
                   std::span<const int> event, std::size_t nodesize, OnCandidate&& on_candidate) {
  const std::size_t m = values.size();
  if (m < 2 * nodesize || m < 2) return;

  // Node-local distinct event times.
  std::vector<double> grid;
  for (std::size_t i = 0; i < m; ++i) {
    if (event[i] != 0) grid.push_back(time[i]);
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  const std::size_t n_times = grid.size();
  if (n_times == 0) return;

  // upper[i]: number of grid times <= time[i]; row i is at risk at grid[k] for k < upper[i].
  std::vector<std::size_t> upper(m);
  std::vector<double> at_risk(n_times, 0.0), deaths(n_times, 0.0);
  std::size_t total_events = 0;
  for (std::size_t i = 0; i < m; ++i) {
    upper[i] = static_cast<std::size_t>(std::upper_bound(grid.begin(), grid.end(), time[i]) - grid.begin());
    for (std::size_t k = 0; k < upper[i]; ++k) at_risk[k] += 1.0;
    if (event[i] != 0) {
      deaths[upper[i] - 1] += 1.0;
      ++total_events;
    }
  }

  std::vector<double> left_risk(n_times), left_deaths(n_times);
  auto statistic = [&]() {
    double score = 0.0;
    double variance = 0.0;
    for (std::size_t k = 0; k < n_times; ++k) {
      const double y = at_risk[k];
      const double d = deaths[k];
      const double yl = left_risk[k];
      score += left_deaths[k] - yl * d / y;
      if (y > 1.0) variance += (yl / y) * (1.0 - yl / y) * ((y - d) / (y - 1.0)) * d;
    }
    return variance > 0.0 ? score * score / variance : 0.0;
  };
  auto add_left = [&](std::size_t i) {
    for (std::size_t k = 0; k < upper[i]; ++k) left_risk[k] += 1.0;
    if (event[i] != 0) left_deaths[upper[i] - 1] += 1.0;
  };

  if (categorical) {
    int n_levels = 0;
    for (double v : values) n_levels = std::max(n_levels, static_cast<int>(v) + 1);
    for (int level = 0; level < n_levels; ++level) {
      std::fill(left_risk.begin(), left_risk.end(), 0.0);
      std::fill(left_deaths.begin(), left_deaths.end(), 0.0);
      std::size_t n_left = 0, e_left = 0;
      for (std::size_t i = 0; i < m; ++i) {
        if (static_cast<int>(values[i]) != level) continue;
        add_left(i);
        ++n_left;
        e_left += event[i] != 0 ? 1 : 0;
      }
      if (n_left < nodesize || m - n_left < nodesize) continue;
      if (e_left == 0 || e_left == total_events) continue;
      on_candidate(0.0, level, statistic());
    }
    return;
  }

  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::fill(left_risk.begin(), left_risk.end(), 0.0);
  std::fill(left_deaths.begin(), left_deaths.end(), 0.0);
  std::size_t e_left = 0;
  for (std::size_t pos = 0; pos + 1 < m; ++pos) {
    const std::size_t i = order[pos];
    add_left(i);
    e_left += event[i] != 0 ? 1 : 0;
    const double here = values[i];
    const double next = values[order[pos + 1]];
    if (here == next) continue;
    const std::size_t n_left = pos + 1;
    if (n_left < nodesize || m - n_left < nodesize) continue;
    if (e_left == 0 || e_left == total_events) continue;
    on_candidate(here + 0.5 * (next - here), -1, statistic());
  }
}

struct TrainingData {
  std::vector<double> time;
  std::vector<int> event;
  // features[v][row]
  std::vector<std::vector<double>> features;
};

StepFunction leaf_nelson_aalen(std::span<const std::size_t> rows, const TrainingData& d) {
  std::vector<std::pair<double, int>> obs;
  obs.reserve(rows.size());
  for (auto r : rows) obs.emplace_back(d.time[r], d.event[r]);
  std::sort(obs.begin(), obs.end());
  std::vector<double> knots, values;
  double cum = 0.0;
  double remaining = static_cast<double>(obs.size());
  for (std::size_t i = 0; i < obs.size();) {
    const double t = obs[i].first;
    double deaths = 0.0, count = 0.0;
    for (; i < obs.size() && obs[i].first == t; ++i) {
      deaths += obs[i].second != 0 ? 1.0 : 0.0;
      count += 1.0;
    }
    if (deaths > 0.0) {
      cum += deaths / remaining;
      knots.push_back(t);
      values.push_back(cum);
    }
    remaining -= count;
  }
  return StepFunction(std::move(knots), std::move(values), 0.0);
}

SurvivalTree grow_tree(const TrainingData& data, const std::vector<ForestFeature>& features, std::size_t mtry,
                       std::size_t nodesize, Rng rng) {
  const std::size_t n = data.time.size();
  SurvivalTree tree;
  tree.in_bag.reserve(n);
  for (std::size_t k = 0; k < n; ++k) tree.in_bag.push_back(rng.uniform_index(n));
  std::sort(tree.in_bag.begin(), tree.in_bag.end());

  struct Pending {
    int node;
    std::vector<std::size_t> rows;
  };
  std::vector<Pending> stack;
  tree.nodes.emplace_back();
  stack.push_back({0, tree.in_bag});

  const std::size_t p = features.size();
  std::vector<std::size_t> candidates(p);
  std::vector<double> values, time;
  std::vector<int> event;

  while (!stack.empty()) {
    Pending cur = std::move(stack.back());
    stack.pop_back();
    const std::size_t m = cur.rows.size();

    time.resize(m);
    event.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
      time[i] = data.time[cur.rows[i]];
      event[i] = data.event[cur.rows[i]];
    }

    int best_var = -1;
    double best_stat = 0.0, best_threshold = 0.0;
    int best_level = -1;
    if (m >= 2 * nodesize) {
      std::iota(candidates.begin(), candidates.end(), std::size_t{0});
      for (std::size_t k = 0; k < mtry; ++k) {
        const std::size_t pick = k + rng.uniform_index(p - k);
        std::swap(candidates[k], candidates[pick]);
      }
      for (std::size_t k = 0; k < mtry; ++k) {
        const std::size_t v = candidates[k];
        values.resize(m);
        for (std::size_t i = 0; i < m; ++i) values[i] = data.features[v][cur.rows[i]];
        scan_variable(values, features[v].categorical, time, event, nodesize,
                      [&](double threshold, int level, double stat) {
                        if (stat > best_stat) {
                          best_stat = stat;
                          best_var = static_cast<int>(v);
                          best_threshold = threshold;
                          best_level = level;
                        }
                      });
      }
    }

    if (best_var < 0) {
      tree.nodes[static_cast<std::size_t>(cur.node)].leaf = static_cast<int>(tree.leaf_chf.size());
      tree.leaf_chf.push_back(leaf_nelson_aalen(cur.rows, data));
      continue;
    }

    const auto& column = data.features[static_cast<std::size_t>(best_var)];
    const bool categorical = features[static_cast<std::size_t>(best_var)].categorical;
    std::vector<std::size_t> left_rows, right_rows;
    for (auto r : cur.rows) {
      const bool go_left = categorical ? static_cast<int>(column[r]) == best_level : column[r] <= best_threshold;
      (go_left ? left_rows : right_rows).push_back(r);
    }
    const int left_id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    const int right_id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    TreeNode& node = tree.nodes[static_cast<std::size_t>(cur.node)];
    node.variable = best_var;
    node.categorical = categorical;
    node.threshold = best_threshold;
    node.level = best_level;
    node.left = left_id;
    node.right = right_id;
    // Right child is pushed first so the left subtree is built first.
    stack.push_back({right_id, std::move(right_rows)});
    stack.push_back({left_id, std::move(left_rows)});
  }
  return tree;
}

// Sort key making the fit independent of input row order.
std::vector<std::size_t> canonical_order(const SurvivalDataset& data, const std::vector<std::string>& covariates) {
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<const Column*> cols;
  for (const auto& c : covariates) cols.push_back(&data.column(c));
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (data.time()[a] != data.time()[b]) return data.time()[a] < data.time()[b];
    if (data.status()[a] != data.status()[b]) return data.status()[a] < data.status()[b];
    for (const Column* c : cols) {
      if (c->is_categorical()) {
        const auto& la = c->level_at(a);
        const auto& lb = c->level_at(b);
        if (la != lb) return la < lb;
      } else if (c->values()[a] != c->values()[b]) {
        return c->values()[a] < c->values()[b];
      }
    }
    return false;
  });
  return order;
}

}  // namespace

std::vector<SplitCandidate> scan_splits(std::span<const double> values, bool categorical,
                                        std::span<const double> time, std::span<const int> event,
                                        std::size_t nodesize) {
  std::vector<SplitCandidate> out;
  scan_variable(values, categorical, time, event, nodesize, [&](double threshold, int level, double stat) {
    SplitCandidate c;
    c.threshold = threshold;
    c.level = level;
    c.statistic = stat;
    c.left.resize(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
      c.left[i] = categorical ? static_cast<int>(values[i]) == level : values[i] <= threshold;
    }
    out.push_back(std::move(c));
  });
  return out;
}

std::size_t SurvivalTree::leaf_for(std::span<const double> features) const {
  std::size_t id = 0;
  while (nodes[id].variable >= 0) {
    const TreeNode& node = nodes[id];
    const double v = features[static_cast<std::size_t>(node.variable)];
    const bool go_left = node.categorical ? static_cast<int>(v) == node.level : v <= node.threshold;
    id = static_cast<std::size_t>(go_left ? node.left : node.right);
  }
  return static_cast<std::size_t>(nodes[id].leaf);
}

std::vector<double> ForestFit::encode(const CovariateValues& x) const {
  std::vector<double> out;
  out.reserve(features.size());
  for (const auto& f : features) {
    auto it = x.find(f.name);
    if (it == x.end()) throw ValidationError("missing value for covariate '" + f.name + "'");
    if (f.categorical) {
      const auto* level = std::get_if<std::string>(&it->second);
      if (!level) throw ValidationError("covariate '" + f.name + "' is categorical; expected a level");
      auto lv = std::find(f.levels.begin(), f.levels.end(), *level);
      if (lv == f.levels.end()) throw ValidationError("unknown level '" + *level + "' for '" + f.name + "'");
      out.push_back(static_cast<double>(lv - f.levels.begin()));
    } else {
      const auto* value = std::get_if<double>(&it->second);
      if (!value) throw ValidationError("covariate '" + f.name + "' is continuous; expected a number");
      out.push_back(*value);
    }
  }
  return out;
}

ForestFit ForestFit::subforest(std::size_t first, std::size_t count) const {
  if (first + count > trees.size() || count == 0) throw ValidationError("subforest: tree range out of bounds");
  ForestFit out = *this;
  out.trees.assign(trees.begin() + static_cast<std::ptrdiff_t>(first),
                   trees.begin() + static_cast<std::ptrdiff_t>(first + count));
  out.options.n_trees = static_cast<int>(count);
  return out;
}

ForestFit fit_rsf(const SurvivalDataset& data, const ColumnRoles& roles, const ForestOptions& options) {
  if (roles.strata) throw ValidationError("rsf does not support strata");
  if (options.n_trees < 1) throw ValidationError("rsf: nTrees must be >= 1");
  if (options.nodesize < 1) throw ValidationError("rsf: nodesize must be >= 1");
  const auto covariates = roles.covariates();
  const auto p = static_cast<int>(covariates.size());
  const int mtry = options.mtry.value_or(static_cast<int>(std::ceil(std::sqrt(static_cast<double>(p)))));
  if (mtry < 1 || mtry > p) {
    throw ValidationError("rsf: mtry must be between 1 and the number of covariates (" + std::to_string(p) + ")");
  }
  const auto events = data.event_indicator(roles.cause_of_interest);
  if (std::count(events.begin(), events.end(), 1) < 2) throw ValidationError("rsf: needs at least 2 events");

  ForestFit fit;
  fit.roles = roles;
  fit.mtry = mtry;
  fit.nodesize = options.nodesize;
  fit.seed = options.seed;
  fit.options = options;
  fit.options.mtry = mtry;

  const auto order = canonical_order(data, covariates);
  TrainingData train;
  train.time.reserve(order.size());
  for (auto r : order) {
    train.time.push_back(data.time()[r]);
    train.event.push_back(events[r]);
  }
  for (const auto& name : covariates) {
    const Column& c = data.column(name);
    ForestFeature f;
    f.name = name;
    f.categorical = c.is_categorical();
    std::vector<double> col;
    col.reserve(order.size());
    if (f.categorical) {
      f.levels = c.levels();
      for (auto r : order) col.push_back(static_cast<double>(c.codes()[r]));
    } else {
      for (auto r : order) col.push_back(c.values()[r]);
    }
    fit.features.push_back(std::move(f));
    train.features.push_back(std::move(col));
  }
  for (std::size_t i = 0; i < train.time.size(); ++i) {
    if (train.event[i] != 0) fit.event_times.push_back(train.time[i]);
  }
  std::sort(fit.event_times.begin(), fit.event_times.end());
  fit.event_times.erase(std::unique(fit.event_times.begin(), fit.event_times.end()), fit.event_times.end());

  fit.trees.resize(static_cast<std::size_t>(options.n_trees));
  parallel_for(fit.trees.size(), [&](std::size_t t) {
    fit.trees[t] = grow_tree(train, fit.features, static_cast<std::size_t>(mtry),
                             static_cast<std::size_t>(options.nodesize), Rng::stream(options.seed, t));
  });

  // Out-of-bag mortality: ensemble CHF summed over the pooled event times.
  const std::size_t n = train.time.size();
  std::vector<double> mortality(n, 0.0);
  std::vector<int> oob_count(n, 0);
  std::vector<double> row(fit.features.size());
  for (const auto& tree : fit.trees) {
    std::vector<double> leaf_mortality(tree.leaf_chf.size());
    for (std::size_t l = 0; l < tree.leaf_chf.size(); ++l) {
      double total = 0.0;
      for (double t : fit.event_times) total += tree.leaf_chf[l](t);
      leaf_mortality[l] = total;
    }
    std::vector<bool> in_bag(n, false);
    for (auto r : tree.in_bag) in_bag[r] = true;
    for (std::size_t i = 0; i < n; ++i) {
      if (in_bag[i]) continue;
      for (std::size_t v = 0; v < row.size(); ++v) row[v] = train.features[v][i];
      mortality[i] += leaf_mortality[tree.leaf_for(row)];
      ++oob_count[i];
    }
  }
  std::vector<double> oob_time, oob_risk;
  std::vector<int> oob_event;
  for (std::size_t i = 0; i < n; ++i) {
    if (oob_count[i] == 0) continue;
    oob_time.push_back(train.time[i]);
    oob_event.push_back(train.event[i]);
    oob_risk.push_back(mortality[i] / oob_count[i]);
  }
  fit.oob_c_index = std::numeric_limits<double>::quiet_NaN();
  try {
    fit.oob_c_index = c_index(oob_time, oob_event, oob_risk).c_index;
  } catch (const ValidationError&) {
    // no comparable out-of-bag pairs
  }
  return fit;
}

std::vector<double> ensemble_chf(const ForestFit& fit, const CovariateValues& x, std::span<const double> times) {
  const auto features = fit.encode(x);
  std::vector<double> sum(times.size(), 0.0);
  for (const auto& tree : fit.trees) {
    const StepFunction& chf = tree.leaf_chf[tree.leaf_for(features)];
    for (std::size_t k = 0; k < times.size(); ++k) sum[k] += chf(times[k]);
  }
  const auto count = static_cast<double>(fit.trees.size());
  for (double& v : sum) v /= count;
  return sum;
}

Prediction predict_survival_rsf(const ForestFit& fit, const CovariateValues& x, std::span<const double> times) {
  const auto chf = ensemble_chf(fit, x, times);
  const double last = fit.event_times.empty() ? 0.0 : fit.event_times.back();
  Prediction p;
  p.values.reserve(times.size());
  for (std::size_t k = 0; k < times.size(); ++k) {
    p.values.push_back(std::exp(-chf[k]));
    p.extrapolated.push_back(times[k] > last);
  }
  return p;
}

Prediction ForestModel::predict(const CovariateValues& x, std::span<const double> times,
                                const std::optional<std::string>& stratum) const {
  if (stratum) throw ValidationError("stratum given for an unstratified fit");
  return predict_survival_rsf(fit_, x, times);
}

double ForestModel::risk_score(const CovariateValues& x, const std::optional<std::string>&, double horizon) const {
  const double t = 0.5 * horizon;
  return ensemble_chf(fit_, x, std::span<const double>(&t, 1)).front();
}

std::unique_ptr<SurvivalModel> ForestModel::refit(const SurvivalDataset& data) const {
  return std::make_unique<ForestModel>(fit_rsf(data, fit_.roles, fit_.options));
}

}  // namespace survcontour
