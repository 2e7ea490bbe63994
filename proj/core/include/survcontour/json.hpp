#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "survcontour/contour.hpp"
#include "survcontour/dataset.hpp"
#include "survcontour/metrics.hpp"
#include "survcontour/nonparametric.hpp"
#include "survcontour/registry.hpp"

// Versioned JSON payloads shared by the CLI, the service and the web client.
namespace survcontour {

using Json = nlohmann::json;

Json encode(const ContourSurface& surface);
Json encode(const QuantileCurves& curves);
Json encode(const Surface3D& surface);
Json encode(const MetricsReport& report);
Json encode(const IngestReport& report);
Json encode(const DatasetSummary& summary);
Json encode(const MedianSplitKM& split);
Json encode(const ColumnRoles& roles);
Json encode(const ModelSpec& spec);
Json encode(const Recommendation& recommendation);
Json encode(const AdjusterProfile& profile);

ContourSurface decode_surface(const Json& j);
QuantileCurves decode_quantile_curves(const Json& j);

// Field-level validation: throws SpecViolationError listing every offending field.
ColumnRoles decode_roles(const Json& j);
ModelSpec decode_spec(const Json& j);

// Adjuster overrides: {"name": number | "level", ...}.
CovariateValues decode_overrides(const Json& j);

// Canonical compact text (sorted keys, shortest round-trip numbers).
std::string dump(const Json& j);

}  // namespace survcontour
