#include "survcontour/contour.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "survcontour/error.hpp"
#include "survcontour/registry.hpp"

namespace survcontour {

namespace {

struct Context {
  const SurvivalModel& model;
  SurvivalDataset data;
  CovariateValues base;
  std::string predictor;
  std::unique_ptr<BootstrapEnsemble> ensemble;
};

Context make_context(const SurvivalModel& model, const SurvivalDataset& data, const AdjusterProfile& profile,
                     const SurfaceOptions& options) {
  const ColumnRoles& roles = model.roles();
  Context ctx{model, with_roles(data, roles), profile.values(), roles.predictor, nullptr};
  for (const auto& a : roles.adjusters) {
    if (!profile.find(a)) throw ValidationError("adjuster profile lacks '" + a + "'");
  }
  if (options.ci) {
    if (!model.supports_ci()) throw UnsupportedError("CI unsupported for this family");
    ctx.ensemble = std::make_unique<BootstrapEnsemble>(model, ctx.data, options.bootstrap);
  }
  return ctx;
}

std::vector<double> predictor_column(const SurvivalDataset& data, const std::string& name) {
  const auto& v = data.column(name).values();
  if (std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); })) {
    throw ValidationError("constant predictor '" + name + "'");
  }
  return v;
}

SurfaceLayer compute_layer(const Context& ctx, std::span<const double> predictor_values, std::vector<double> grid,
                           const std::optional<std::string>& stratum) {
  const std::size_t rows = predictor_values.size();
  const std::size_t cols = grid.size();
  SurfaceLayer layer;
  layer.time_grid = std::move(grid);
  layer.prob.assign(rows * cols, 0.0);
  if (ctx.ensemble) {
    layer.lower.emplace(rows * cols, 0.0);
    layer.upper.emplace(rows * cols, 0.0);
  }
  std::vector<std::vector<bool>> extrapolated(rows);
  std::vector<char> clamped(rows, 0);
  parallel_for(rows, [&](std::size_t r) {
    CovariateValues x = ctx.base;
    x[ctx.predictor] = predictor_values[r];
    const Prediction p = ctx.model.predict(x, layer.time_grid, stratum);
    std::copy(p.values.begin(), p.values.end(), layer.prob.begin() + static_cast<std::ptrdiff_t>(r * cols));
    extrapolated[r] = p.extrapolated;
    clamped[r] = p.clamped ? 1 : 0;
    if (ctx.ensemble) {
      const auto band = ctx.ensemble->interval(x, layer.time_grid, stratum);
      for (std::size_t c = 0; c < cols; ++c) {
        (*layer.lower)[r * cols + c] = std::min(band.lower[c], p.values[c]);
        (*layer.upper)[r * cols + c] = std::max(band.upper[c], p.values[c]);
      }
    }
  });
  layer.extrapolated.assign(cols, false);
  for (const auto& e : extrapolated) {
    for (std::size_t c = 0; c < cols && c < e.size(); ++c) layer.extrapolated[c] = layer.extrapolated[c] || e[c];
  }
  layer.clamped = std::any_of(clamped.begin(), clamped.end(), [](char c) { return c != 0; });
  return layer;
}

template <class Out>
void fill_layers(Out& out, const Context& ctx, std::span<const double> predictor_values, const SurfaceOptions& options) {
  const ColumnRoles& roles = ctx.model.roles();
  const auto levels = ctx.model.strata();
  const auto event = ctx.data.event_indicator(roles.cause_of_interest);
  if (levels.empty()) {
    out.layer = compute_layer(ctx, predictor_values, time_grid(ctx.data.time(), event, options.n_time), std::nullopt);
    return;
  }
  const Column& strata = ctx.data.column(*roles.strata);
  for (std::size_t s = 0; s < levels.size(); ++s) {
    std::vector<double> t;
    std::vector<int> e;
    for (std::size_t i = 0; i < ctx.data.size(); ++i) {
      if (strata.level_at(i) != levels[s]) continue;
      t.push_back(ctx.data.time()[i]);
      e.push_back(event[i]);
    }
    if (t.empty()) {
      out.omitted_strata.push_back(levels[s]);
      continue;
    }
    Panel panel;
    panel.stratum = levels[s];
    panel.n = t.size();
    panel.layer = compute_layer(ctx, predictor_values, time_grid(t, e, options.n_time), levels[s]);
    out.panels.push_back(std::move(panel));
  }
}

template <class Out>
void fill_header(Out& out, const Context& ctx, const AdjusterProfile& profile, const SurfaceOptions& options) {
  out.family = ctx.model.family();
  out.outcome_kind = ctx.model.outcome_kind();
  out.predictor = ctx.predictor;
  out.adjusters = profile;
  if (ctx.ensemble) {
    out.ci = CiInfo{ctx.ensemble->replicates_used(), ctx.ensemble->failed(), options.bootstrap.level};
  }
}

}  // namespace

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  if (n < 2) throw ValidationError("grid needs at least 2 points");
  std::vector<double> out(n);
  const double step = (hi - lo) / static_cast<double>(n - 1);
  for (std::size_t k = 0; k < n; ++k) out[k] = lo + static_cast<double>(k) * step;
  out.back() = hi;
  return out;
}

std::vector<double> time_grid(std::span<const double> times, std::span<const int> event, std::size_t n) {
  if (n < 2) throw ValidationError("time grid needs at least 2 points");
  if (times.empty()) throw ValidationError("time grid of an empty sample");
  std::vector<double> candidates{0.0};
  double max_time = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    max_time = std::max(max_time, times[i]);
    if (event[i] != 0) candidates.push_back(times[i]);
  }
  candidates.push_back(max_time);
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  if (candidates.size() <= n) return candidates;
  std::vector<double> out;
  out.reserve(n);
  const double step = static_cast<double>(candidates.size() - 1) / static_cast<double>(n - 1);
  for (std::size_t k = 0; k < n; ++k) {
    const auto idx = static_cast<std::size_t>(std::llround(static_cast<double>(k) * step));
    if (out.empty() || candidates[idx] != out.back()) out.push_back(candidates[idx]);
  }
  return out;
}

Histogram histogram(std::span<const double> values, std::size_t bins) {
  if (bins < 1) throw ValidationError("histogram needs at least 1 bin");
  if (values.empty()) throw ValidationError("histogram of an empty sample");
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  Histogram h;
  h.counts.assign(bins, 0);
  if (lo == hi) {
    h.edges = {lo, hi};
    h.counts.assign(1, values.size());
    return h;
  }
  h.edges = linspace(lo, hi, bins + 1);
  const double width = (hi - lo) / static_cast<double>(bins);
  for (double v : values) {
    auto b = static_cast<std::size_t>(std::floor((v - lo) / width));
    b = std::min(b, bins - 1);
    // Keep bin membership consistent with the published edges.
    while (b > 0 && v < h.edges[b]) --b;
    while (b + 1 < bins && v >= h.edges[b + 1]) ++b;
    ++h.counts[b];
  }
  return h;
}

ContourSurface build_surface(const SurvivalModel& model, const SurvivalDataset& data, const AdjusterProfile& profile,
                             const SurfaceOptions& options) {
  const auto observed = predictor_column(data, model.roles().predictor);
  const Context ctx = make_context(model, data, profile, options);
  ContourSurface s;
  fill_header(s, ctx, profile, options);
  const auto [lo, hi] = std::minmax_element(observed.begin(), observed.end());
  s.predictor_grid = linspace(*lo, *hi, options.n_pred);
  s.histogram = histogram(observed, options.bins);
  fill_layers(s, ctx, s.predictor_grid, options);
  return s;
}

ContourSurface build_stratified_panels(const SurvivalModel& model, const SurvivalDataset& data,
                                       const AdjusterProfile& profile, const SurfaceOptions& options) {
  if (model.strata().empty()) throw ValidationError("stratified panels need a stratified model");
  return build_surface(model, data, profile, options);
}

QuantileCurves build_quantile_curves(const SurvivalModel& model, const SurvivalDataset& data,
                                     const AdjusterProfile& profile, const SurfaceOptions& options) {
  const auto observed = predictor_column(data, model.roles().predictor);
  const Context ctx = make_context(model, data, profile, options);
  QuantileCurves q;
  fill_header(q, ctx, profile, options);
  q.levels.assign(kQuantileLevels.begin(), kQuantileLevels.end());
  for (double level : q.levels) q.predictor_values.push_back(quantile_type7(observed, level));
  fill_layers(q, ctx, q.predictor_values, options);
  return q;
}

Surface3D to_surface3d(const ContourSurface& surface) {
  Surface3D out;
  out.schema_version = surface.schema_version;
  out.family = surface.family;
  out.outcome_kind = surface.outcome_kind;
  out.predictor = surface.predictor;
  out.x = surface.layer.time_grid;
  out.y = surface.predictor_grid;
  out.z = surface.layer.prob;
  out.ci_lower = surface.layer.lower;
  out.ci_upper = surface.layer.upper;
  for (const auto& p : surface.panels) {
    out.panels.push_back({p.stratum, p.layer.time_grid, p.layer.prob, p.layer.lower, p.layer.upper});
  }
  return out;
}

}  // namespace survcontour
