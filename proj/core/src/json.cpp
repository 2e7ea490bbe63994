#include "survcontour/json.hpp"

#include <cmath>
#include <set>

#include "survcontour/error.hpp"

namespace survcontour {

namespace {

Json encode_layer(const SurfaceLayer& layer, const char* values_key) {
  Json j;
  j["time_grid"] = layer.time_grid;
  j[values_key] = layer.prob;
  if (layer.lower) j["lower"] = *layer.lower;
  if (layer.upper) j["upper"] = *layer.upper;
  return j;
}

Json layer_flags(const SurfaceLayer& layer) {
  return Json{{"extrapolated", layer.extrapolated}, {"clamped", layer.clamped}};
}

Json encode_panels(const std::vector<Panel>& panels, const char* values_key) {
  Json out = Json::array();
  for (const auto& p : panels) {
    Json j = encode_layer(p.layer, values_key);
    j["stratum"] = p.stratum;
    j["n"] = p.n;
    j["flags"] = layer_flags(p.layer);
    out.push_back(std::move(j));
  }
  return out;
}

Json encode_value(const CovariateValue& v) {
  if (const auto* d = std::get_if<double>(&v)) return *d;
  return std::get<std::string>(v);
}

CovariateValue decode_value(const Json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) return j.get<std::string>();
  throw ValidationError("adjuster values must be numbers or strings");
}

AdjusterProfile decode_profile(const Json& j) {
  AdjusterProfile p;
  for (const auto& e : j) {
    p.entries.push_back({e.at("name").get<std::string>(), decode_value(e.at("value")),
                         e.at("source").get<std::string>() == "user"});
  }
  return p;
}

SurfaceLayer decode_layer(const Json& j, const char* values_key, const Json& flags) {
  SurfaceLayer layer;
  layer.time_grid = j.at("time_grid").get<std::vector<double>>();
  layer.prob = j.at(values_key).get<std::vector<double>>();
  if (j.contains("lower")) layer.lower = j.at("lower").get<std::vector<double>>();
  if (j.contains("upper")) layer.upper = j.at("upper").get<std::vector<double>>();
  layer.extrapolated = flags.at("extrapolated").get<std::vector<bool>>();
  layer.clamped = flags.at("clamped").get<bool>();
  return layer;
}

std::vector<Panel> decode_panels(const Json& j, const char* values_key) {
  std::vector<Panel> out;
  if (!j.contains("panels")) return out;
  for (const auto& p : j.at("panels")) {
    out.push_back({p.at("stratum").get<std::string>(), p.at("n").get<std::size_t>(),
                   decode_layer(p, values_key, p.at("flags"))});
  }
  return out;
}

Json encode_ci(const std::optional<CiInfo>& ci) {
  if (!ci) return nullptr;
  return Json{{"replicates", ci->replicates}, {"failed", ci->failed}, {"level", ci->level}};
}

std::optional<CiInfo> decode_ci(const Json& j) {
  if (!j.contains("ci") || j.at("ci").is_null()) return std::nullopt;
  const Json& c = j.at("ci");
  return CiInfo{c.at("replicates").get<std::size_t>(), c.at("failed").get<std::size_t>(), c.at("level").get<double>()};
}

OutcomeKind decode_outcome(const Json& j) {
  const auto text = j.get<std::string>();
  if (text == "survival") return OutcomeKind::survival;
  if (text == "cif") return OutcomeKind::cif;
  throw ValidationError("unknown outcome_kind '" + text + "'");
}

template <class T>
void header(Json& j, const T& payload, const char* kind) {
  j["schema_version"] = payload.schema_version;
  j["kind"] = kind;
  j["family"] = payload.family;
  j["outcome_kind"] = to_string(payload.outcome_kind);
  j["predictor"] = payload.predictor;
}

void check_header(const Json& j, const char* kind) {
  if (j.at("schema_version").get<int>() != kSchemaVersion) throw ValidationError("unsupported schema_version");
  if (j.at("kind").get<std::string>() != kind) throw ValidationError(std::string("expected a ") + kind + " payload");
}

Json encode_km(const KMEstimate& km) {
  const auto& s = km.survival;
  return Json{{"time", s.knots()},
              {"survival", s.values()},
              {"greenwood_variance", km.greenwood_variance},
              {"at_risk", km.at_risk},
              {"events", km.events},
              {"all_censored", km.all_censored}};
}

// Accumulates field-level problems while decoding untrusted request bodies.
class FieldReader {
 public:
  explicit FieldReader(std::string prefix) : prefix_(std::move(prefix)) {}

  void fail(const std::string& field, const std::string& message) { violations_.push_back({prefix_ + field, message}); }

  std::optional<std::string> string(const Json& obj, const std::string& field, bool required) {
    if (!obj.contains(field) || obj.at(field).is_null()) {
      if (required) fail(field, "is required");
      return std::nullopt;
    }
    if (!obj.at(field).is_string()) {
      fail(field, "must be a string");
      return std::nullopt;
    }
    return obj.at(field).get<std::string>();
  }

  std::optional<long long> integer(const Json& obj, const std::string& field) {
    if (!obj.contains(field) || obj.at(field).is_null()) return std::nullopt;
    const Json& v = obj.at(field);
    if (v.is_number_integer()) return v.get<long long>();
    if (v.is_number_float() && std::floor(v.get<double>()) == v.get<double>() && std::isfinite(v.get<double>())) {
      return static_cast<long long>(v.get<double>());
    }
    fail(field, "must be an integer");
    return std::nullopt;
  }

  std::optional<double> number(const Json& obj, const std::string& field) {
    if (!obj.contains(field) || obj.at(field).is_null()) return std::nullopt;
    if (!obj.at(field).is_number()) {
      fail(field, "must be a number");
      return std::nullopt;
    }
    return obj.at(field).get<double>();
  }

  void unknown_fields(const Json& obj, const std::set<std::string>& allowed) {
    for (const auto& [key, value] : obj.items()) {
      if (!allowed.contains(key)) fail(key, "unknown field");
    }
  }

  std::vector<Violation>& violations() { return violations_; }

 private:
  std::string prefix_;
  std::vector<Violation> violations_;
};

ColumnRoles read_roles(const Json& j, FieldReader& r) {
  ColumnRoles roles;
  if (!j.is_object()) {
    r.fail("", "must be an object");
    return roles;
  }
  r.unknown_fields(j, {"time_column", "status_column", "predictor", "adjusters", "strata", "cause_of_interest"});
  roles.time_column = r.string(j, "time_column", true).value_or("");
  roles.status_column = r.string(j, "status_column", true).value_or("");
  roles.predictor = r.string(j, "predictor", true).value_or("");
  roles.strata = r.string(j, "strata", false);
  if (j.contains("adjusters") && !j.at("adjusters").is_null()) {
    const Json& a = j.at("adjusters");
    if (!a.is_array() || !std::all_of(a.begin(), a.end(), [](const Json& e) { return e.is_string(); })) {
      r.fail("adjusters", "must be an array of column names");
    } else {
      roles.adjusters = a.get<std::vector<std::string>>();
    }
  }
  if (auto cause = r.integer(j, "cause_of_interest")) {
    if (*cause < 1) r.fail("cause_of_interest", "must be >= 1");
    else roles.cause_of_interest = static_cast<int>(*cause);
  }
  if (!roles.time_column.empty() && roles.time_column == roles.status_column) {
    r.fail("status_column", "must differ from time_column");
  }
  if (std::find(roles.adjusters.begin(), roles.adjusters.end(), roles.predictor) != roles.adjusters.end()) {
    r.fail("adjusters", "must not contain the predictor");
  }
  return roles;
}

}  // namespace

Json encode(const AdjusterProfile& profile) {
  Json out = Json::array();
  for (const auto& e : profile.entries) {
    out.push_back({{"name", e.name}, {"value", encode_value(e.value)}, {"source", e.user_specified ? "user" : "default"}});
  }
  return out;
}

Json encode(const ContourSurface& s) {
  Json j = encode_layer(s.layer, "prob");
  header(j, s, "contour_surface");
  j["predictor_grid"] = s.predictor_grid;
  j["histogram"] = {{"edges", s.histogram.edges}, {"counts", s.histogram.counts}};
  j["adjusters"] = encode(s.adjusters);
  if (s.stratified()) j["panels"] = encode_panels(s.panels, "prob");
  Json flags = layer_flags(s.layer);
  flags["omitted_strata"] = s.omitted_strata;
  j["flags"] = std::move(flags);
  if (s.ci) j["ci"] = encode_ci(s.ci);
  return j;
}

ContourSurface decode_surface(const Json& j) {
  check_header(j, "contour_surface");
  ContourSurface s;
  s.schema_version = j.at("schema_version").get<int>();
  s.family = j.at("family").get<std::string>();
  s.outcome_kind = decode_outcome(j.at("outcome_kind"));
  s.predictor = j.at("predictor").get<std::string>();
  s.predictor_grid = j.at("predictor_grid").get<std::vector<double>>();
  s.layer = decode_layer(j, "prob", j.at("flags"));
  s.histogram.edges = j.at("histogram").at("edges").get<std::vector<double>>();
  s.histogram.counts = j.at("histogram").at("counts").get<std::vector<std::size_t>>();
  s.adjusters = decode_profile(j.at("adjusters"));
  s.panels = decode_panels(j, "prob");
  s.omitted_strata = j.at("flags").at("omitted_strata").get<std::vector<std::string>>();
  s.ci = decode_ci(j);
  return s;
}

Json encode(const QuantileCurves& q) {
  Json j = encode_layer(q.layer, "curves");
  header(j, q, "quantile_curves");
  j["levels"] = q.levels;
  j["predictor_values"] = q.predictor_values;
  j["adjusters"] = encode(q.adjusters);
  if (!q.panels.empty() || !q.omitted_strata.empty()) j["panels"] = encode_panels(q.panels, "curves");
  Json flags = layer_flags(q.layer);
  flags["omitted_strata"] = q.omitted_strata;
  j["flags"] = std::move(flags);
  if (q.ci) j["ci"] = encode_ci(q.ci);
  return j;
}

QuantileCurves decode_quantile_curves(const Json& j) {
  check_header(j, "quantile_curves");
  QuantileCurves q;
  q.schema_version = j.at("schema_version").get<int>();
  q.family = j.at("family").get<std::string>();
  q.outcome_kind = decode_outcome(j.at("outcome_kind"));
  q.predictor = j.at("predictor").get<std::string>();
  q.levels = j.at("levels").get<std::vector<double>>();
  q.predictor_values = j.at("predictor_values").get<std::vector<double>>();
  q.layer = decode_layer(j, "curves", j.at("flags"));
  q.adjusters = decode_profile(j.at("adjusters"));
  q.panels = decode_panels(j, "curves");
  q.omitted_strata = j.at("flags").at("omitted_strata").get<std::vector<std::string>>();
  q.ci = decode_ci(j);
  return q;
}

Json encode(const Surface3D& s) {
  Json j;
  header(j, s, "surface3d");
  j["x"] = s.x;
  j["y"] = s.y;
  j["z"] = s.z;
  auto ci_layers = [](const std::optional<std::vector<double>>& lo, const std::optional<std::vector<double>>& hi) {
    if (!lo || !hi) return Json(nullptr);
    return Json{{"lower", *lo}, {"upper", *hi}, {"opacity", 0.35}};
  };
  j["ci_layers"] = ci_layers(s.ci_lower, s.ci_upper);
  if (!s.panels.empty()) {
    Json panels = Json::array();
    for (const auto& p : s.panels) {
      panels.push_back({{"stratum", p.stratum}, {"x", p.x}, {"z", p.z}, {"ci_layers", ci_layers(p.ci_lower, p.ci_upper)}});
    }
    j["panels"] = std::move(panels);
  }
  return j;
}

Json encode(const MetricsReport& m) {
  return Json{{"schema_version", kSchemaVersion},
              {"kind", "metrics"},
              {"family", m.family},
              {"c_index", m.concordance.c_index},
              {"comparable_pairs", m.concordance.comparable_pairs},
              {"concordant_pairs", m.concordance.concordant_pairs},
              {"tied_pairs", m.concordance.tied_pairs},
              {"integrated_brier", m.brier.integrated},
              {"tau", m.brier.tau},
              {"brier", {{"times", m.brier.times}, {"scores", m.brier.scores}}}};
}

Json encode(const IngestReport& r) {
  Json drops = Json::array();
  for (const auto& d : r.drops) drops.push_back({{"reason", d.reason}, {"count", d.count}});
  return Json{{"rows_in", r.rows_in}, {"rows_kept", r.rows_kept}, {"drops", std::move(drops)}};
}

Json encode(const DatasetSummary& s) {
  Json events = Json::object();
  for (const auto& [code, count] : s.events_by_cause) events[std::to_string(code)] = count;
  Json columns = Json::array();
  for (const auto& c : s.columns) {
    Json col{{"name", c.name}, {"kind", c.kind == ColumnKind::categorical ? "categorical" : "continuous"}};
    if (c.kind == ColumnKind::categorical) {
      col["levels"] = c.levels;
      col["level_counts"] = c.level_counts;
    } else {
      col["min"] = c.min;
      col["max"] = c.max;
      col["median"] = c.median;
    }
    columns.push_back(std::move(col));
  }
  return Json{{"n", s.n},
              {"censored", s.censored},
              {"events_by_cause", std::move(events)},
              {"follow_up", {{"min", s.min_time}, {"max", s.max_time}}},
              {"columns", std::move(columns)},
              {"strata_levels", s.strata_levels}};
}

Json encode(const MedianSplitKM& split) {
  return Json{{"schema_version", kSchemaVersion},
              {"kind", "km_split"},
              {"predictor", split.predictor},
              {"cutoff", split.cutoff},
              {"groups",
               {{{"label", "low"}, {"n", split.n_low}, {"km", encode_km(split.low)}},
                {{"label", "high"}, {"n", split.n_high}, {"km", encode_km(split.high)}}}}};
}

Json encode(const ColumnRoles& roles) {
  Json j{{"time_column", roles.time_column},
         {"status_column", roles.status_column},
         {"predictor", roles.predictor},
         {"adjusters", roles.adjusters},
         {"cause_of_interest", roles.cause_of_interest}};
  j["strata"] = roles.strata ? Json(*roles.strata) : Json(nullptr);
  return j;
}

Json encode(const ModelSpec& spec) {
  const ModelOptions& o = spec.options;
  Json options{{"ties", to_string(o.ties)},
               {"distribution", to_string(o.distribution)},
               {"max_iter", o.max_iter},
               {"tol", o.tol},
               {"n_trees", o.n_trees},
               {"nodesize", o.nodesize},
               {"seed", o.seed},
               {"bootstrap_replicates", o.bootstrap_replicates},
               {"level", o.level}};
  options["mtry"] = o.mtry ? Json(*o.mtry) : Json(nullptr);
  return Json{{"family", to_string(spec.family)}, {"roles", encode(spec.roles)}, {"options", std::move(options)}};
}

Json encode(const Recommendation& r) {
  Json ranked = Json::array();
  for (Family f : r.ranked) ranked.push_back(to_string(f));
  return Json{{"ranked", std::move(ranked)}, {"unsupported", r.unsupported}, {"notes", r.notes}};
}

ColumnRoles decode_roles(const Json& j) {
  FieldReader r("roles.");
  ColumnRoles roles = read_roles(j, r);
  if (!r.violations().empty()) throw SpecViolationError(std::move(r.violations()));
  return roles;
}

ModelSpec decode_spec(const Json& j) {
  FieldReader top("");
  ModelSpec spec;
  if (!j.is_object()) {
    top.fail("body", "must be a JSON object");
    throw SpecViolationError(std::move(top.violations()));
  }
  top.unknown_fields(j, {"family", "roles", "options", "dataset_id"});
  if (auto family = top.string(j, "family", true)) {
    try {
      spec.family = parse_family(*family);
    } catch (const ValidationError& e) {
      top.fail("family", e.what());
    }
  }

  FieldReader roles_reader("roles.");
  if (j.contains("roles")) spec.roles = read_roles(j.at("roles"), roles_reader);
  else top.fail("roles", "is required");

  FieldReader opt("options.");
  ModelOptions& o = spec.options;
  if (j.contains("options") && !j.at("options").is_null()) {
    const Json& oj = j.at("options");
    if (!oj.is_object()) {
      top.fail("options", "must be an object");
    } else {
      opt.unknown_fields(oj, {"ties", "distribution", "max_iter", "tol", "n_trees", "mtry", "nodesize", "seed",
                              "bootstrap_replicates", "level"});
      if (auto ties = opt.string(oj, "ties", false)) {
        try {
          o.ties = parse_ties(*ties);
        } catch (const ValidationError& e) {
          opt.fail("ties", e.what());
        }
      }
      if (auto dist = opt.string(oj, "distribution", false)) {
        try {
          o.distribution = parse_distribution(*dist);
        } catch (const ValidationError& e) {
          opt.fail("distribution", e.what());
        }
      }
      if (auto v = opt.integer(oj, "max_iter")) o.max_iter = static_cast<int>(*v);
      if (auto v = opt.number(oj, "tol")) o.tol = *v;
      if (auto v = opt.integer(oj, "n_trees")) o.n_trees = static_cast<int>(*v);
      if (auto v = opt.integer(oj, "mtry")) o.mtry = static_cast<int>(*v);
      if (auto v = opt.integer(oj, "nodesize")) o.nodesize = static_cast<int>(*v);
      if (auto v = opt.integer(oj, "seed")) {
        if (*v < 0) opt.fail("seed", "must be non-negative");
        else o.seed = static_cast<std::uint64_t>(*v);
      }
      if (auto v = opt.integer(oj, "bootstrap_replicates")) o.bootstrap_replicates = static_cast<int>(*v);
      if (auto v = opt.number(oj, "level")) o.level = *v;
    }
  }

  std::vector<Violation> all = std::move(top.violations());
  for (auto* r : {&roles_reader, &opt}) all.insert(all.end(), r->violations().begin(), r->violations().end());
  if (!all.empty()) throw SpecViolationError(std::move(all));
  return spec;
}

CovariateValues decode_overrides(const Json& j) {
  if (!j.is_object()) throw SpecViolationError(std::vector<Violation>{{"adjusters", "must be a JSON object"}});
  CovariateValues out;
  std::vector<Violation> violations;
  for (const auto& [name, value] : j.items()) {
    if (value.is_number()) out[name] = value.get<double>();
    else if (value.is_string()) out[name] = value.get<std::string>();
    else violations.push_back({"adjusters." + name, "must be a number or a level"});
  }
  if (!violations.empty()) throw SpecViolationError(std::move(violations));
  return out;
}

std::string dump(const Json& j) { return j.dump(); }

}  // namespace survcontour
