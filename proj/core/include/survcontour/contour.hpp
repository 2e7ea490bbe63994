#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "survcontour/bootstrap.hpp"
#include "survcontour/dataset.hpp"
#include "survcontour/model.hpp"

namespace survcontour {

inline constexpr int kSchemaVersion = 1;

struct SurfaceOptions {
  std::size_t n_pred = 50;
  std::size_t n_time = 200;
  bool ci = false;
  std::size_t bins = 20;
  BootstrapOptions bootstrap;
};

struct Histogram {
  std::vector<double> edges;  // bins + 1 edges spanning [min, max]
  std::vector<std::size_t> counts;
  bool operator==(const Histogram&) const = default;
};

// One probability matrix over (predictor × time); row-major, predictor-major.
struct SurfaceLayer {
  std::vector<double> time_grid;
  std::vector<double> prob;
  std::optional<std::vector<double>> lower;
  std::optional<std::vector<double>> upper;
  std::vector<bool> extrapolated;  // per time column
  bool clamped = false;
  bool operator==(const SurfaceLayer&) const = default;
};

struct Panel {
  std::string stratum;
  std::size_t n = 0;
  SurfaceLayer layer;
  bool operator==(const Panel&) const = default;
};

struct CiInfo {
  std::size_t replicates = 0;
  std::size_t failed = 0;
  double level = 0.95;
  bool operator==(const CiInfo&) const = default;
};

// Stratified surfaces leave `layer` empty and carry one panel per non-empty stratum level.
struct ContourSurface {
  int schema_version = kSchemaVersion;
  std::string family;
  OutcomeKind outcome_kind = OutcomeKind::survival;
  std::string predictor;
  std::vector<double> predictor_grid;
  SurfaceLayer layer;
  Histogram histogram;
  AdjusterProfile adjusters;
  std::vector<Panel> panels;
  std::vector<std::string> omitted_strata;
  std::optional<CiInfo> ci;

  std::size_t rows() const noexcept { return predictor_grid.size(); }
  bool stratified() const noexcept { return !panels.empty() || !omitted_strata.empty(); }
  bool operator==(const ContourSurface&) const = default;
};

inline constexpr std::array<double, 5> kQuantileLevels{0.1, 0.3, 0.5, 0.7, 0.9};

struct QuantileCurves {
  int schema_version = kSchemaVersion;
  std::string family;
  OutcomeKind outcome_kind = OutcomeKind::survival;
  std::string predictor;
  std::vector<double> levels;
  std::vector<double> predictor_values;
  // One curve per level in `layer.prob` (level-major), or per level within each panel.
  SurfaceLayer layer;
  AdjusterProfile adjusters;
  std::vector<Panel> panels;
  std::vector<std::string> omitted_strata;
  std::optional<CiInfo> ci;
  bool operator==(const QuantileCurves&) const = default;
};

struct Surface3D {
  int schema_version = kSchemaVersion;
  std::string family;
  OutcomeKind outcome_kind = OutcomeKind::survival;
  std::string predictor;
  std::vector<double> x;  // time grid
  std::vector<double> y;  // predictor grid
  std::vector<double> z;  // row-major over (y, x)
  std::optional<std::vector<double>> ci_lower;
  std::optional<std::vector<double>> ci_upper;
  struct PanelZ {
    std::string stratum;
    std::vector<double> x;
    std::vector<double> z;
    std::optional<std::vector<double>> ci_lower;
    std::optional<std::vector<double>> ci_upper;
    bool operator==(const PanelZ&) const = default;
  };
  std::vector<PanelZ> panels;
  bool operator==(const Surface3D&) const = default;
};

// n evenly spaced points from lo to hi with exact endpoints.
std::vector<double> linspace(double lo, double hi, std::size_t n);

// 0, the distinct event times and the largest follow-up, evenly thinned to at most n points
// (first and last always kept).
std::vector<double> time_grid(std::span<const double> times, std::span<const int> event, std::size_t n);

Histogram histogram(std::span<const double> values, std::size_t bins);

// Contour surface of the model's predictions at the adjuster profile. Stratified models yield one
// panel per stratum level.
ContourSurface build_surface(const SurvivalModel& model, const SurvivalDataset& data, const AdjusterProfile& profile,
                             const SurfaceOptions& options = {});

// Explicitly stratified variant; throws unless the model is stratified.
ContourSurface build_stratified_panels(const SurvivalModel& model, const SurvivalDataset& data,
                                       const AdjusterProfile& profile, const SurfaceOptions& options = {});

QuantileCurves build_quantile_curves(const SurvivalModel& model, const SurvivalDataset& data,
                                     const AdjusterProfile& profile, const SurfaceOptions& options = {});

Surface3D to_surface3d(const ContourSurface& surface);

}  // namespace survcontour
