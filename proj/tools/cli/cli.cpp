#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "report.hpp"
#include "survcontour/contour.hpp"
#include "survcontour/error.hpp"
#include "survcontour/json.hpp"
#include "survcontour/metrics.hpp"
#include "survcontour/registry.hpp"

namespace survcontour::cli {

namespace fs = std::filesystem;

namespace {

struct DataArgs {
  std::string data;
  std::string time;
  std::string status;
  std::string predictor;
  std::vector<std::string> adjusters;
  std::string strata;
  int cause = 1;
  std::vector<std::string> categorical;
  bool strict = false;
};

struct FitArgs {
  std::string family;
  std::string ties = "efron";
  std::string dist = "weibull";
  int max_iter = 25;
  int n_trees = 200;
  std::optional<int> mtry;
  int nodesize = 15;
  std::uint64_t seed = 1;
  int bootstrap = 200;
  double level = 0.95;
  std::string out;
  bool ci = false;
  bool html = false;
  bool surface3d = false;
  std::size_t n_pred = 50;
  std::size_t n_time = 200;
  std::size_t bins = 20;
  std::vector<std::string> set;
};

void add_data_options(CLI::App& cmd, DataArgs& a) {
  cmd.add_option("--data", a.data, "CSV file")->required();
  cmd.add_option("--time", a.time, "Follow-up time column")->required();
  cmd.add_option("--status", a.status, "Status column (0 censored, 1.. event causes)")->required();
  cmd.add_option("--predictor", a.predictor, "Continuous predictor shown on the contour")->required();
  cmd.add_option("--adjusters", a.adjusters, "Adjuster columns")->delimiter(',');
  cmd.add_option("--strata", a.strata, "Strata column");
  cmd.add_option("--cause", a.cause, "Event code of interest")->check(CLI::PositiveNumber);
  cmd.add_option("--categorical", a.categorical, "Columns to treat as categorical")->delimiter(',');
  cmd.add_flag("--strict", a.strict, "Reject malformed rows instead of dropping them");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read data file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
}

ColumnRoles roles_from(const DataArgs& a) {
  ColumnRoles roles;
  roles.time_column = a.time;
  roles.status_column = a.status;
  roles.predictor = a.predictor;
  roles.adjusters = a.adjusters;
  if (!a.strata.empty()) roles.strata = a.strata;
  roles.cause_of_interest = a.cause;
  return roles;
}

IngestResult ingest(const DataArgs& a) {
  IngestOptions options;
  options.strict = a.strict;
  options.categorical = a.categorical;
  return ingest_csv(read_file(a.data), roles_from(a), options);
}

CovariateValues parse_overrides(const std::vector<std::string>& items, const SurvivalDataset& data) {
  CovariateValues out;
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw ValidationError("--set expects NAME=VALUE, got '" + item + "'");
    const std::string name = item.substr(0, eq);
    const std::string value = item.substr(eq + 1);
    if (!data.has_column(name)) throw ValidationError("unknown adjuster '" + name + "'");
    if (data.column(name).is_categorical()) {
      out[name] = value;
    } else if (auto number = parse_number(value)) {
      out[name] = *number;
    } else {
      throw ValidationError("adjuster '" + name + "' expects a number, got '" + value + "'");
    }
  }
  return out;
}

int fit_command(const DataArgs& d, const FitArgs& f, std::ostream& out) {
  const IngestResult ingested = ingest(d);
  const SurvivalDataset& data = ingested.data;

  ModelSpec spec;
  spec.family = parse_family(f.family);
  spec.roles = roles_from(d);
  ModelOptions& o = spec.options;
  o.ties = parse_ties(f.ties);
  o.distribution = parse_distribution(f.dist);
  o.max_iter = f.max_iter;
  o.n_trees = f.n_trees;
  o.mtry = f.mtry;
  o.nodesize = f.nodesize;
  o.seed = f.seed;
  o.bootstrap_replicates = f.bootstrap;
  o.level = f.level;

  const auto model = fit(spec, data);
  const AdjusterProfile profile =
      apply_overrides(default_adjuster_profile(data, spec.roles), parse_overrides(f.set, data), data);
  SurfaceOptions options;
  options.n_pred = f.n_pred;
  options.n_time = f.n_time;
  options.bins = f.bins;
  options.ci = f.ci;
  options.bootstrap = bootstrap_options(spec);

  const ContourSurface surface = build_surface(*model, data, profile, options);
  const QuantileCurves curves = build_quantile_curves(*model, data, profile, options);
  const MetricsReport metrics = evaluate_model(*model, data);

  std::map<std::string, std::string> files;
  files["contour.json"] = dump(encode(surface));
  files["quantiles.json"] = dump(encode(curves));
  files["metrics.json"] = dump(encode(metrics));
  if (f.surface3d || f.html) files["surface3d.json"] = dump(encode(to_surface3d(surface)));
  if (f.html) {
    files["report.html"] = render_report(files["contour.json"], files["quantiles.json"], files["metrics.json"],
                                         dump(encode(ingested.report)));
  }

  fs::create_directories(f.out);
  for (const auto& [name, content] : files) {
    write_file(fs::path(f.out) / name, content);
    out << (fs::path(f.out) / name).string() << "\n";
  }
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Contour surfaces of survival predictions", "survcontour"};
  app.require_subcommand(1);

  DataArgs fit_data;
  FitArgs fit_args;
  CLI::App* fit_cmd = app.add_subcommand("fit", "Fit a model and write contour, quantile and metrics JSON");
  add_data_options(*fit_cmd, fit_data);
  fit_cmd->add_option("--family", fit_args.family, "kaplan_meier, cox, stratified_cox, parametric, fine_gray or rsf")
      ->required();
  fit_cmd->add_option("--out", fit_args.out, "Output directory")->required();
  fit_cmd->add_option("--ties", fit_args.ties, "Cox ties: efron or breslow");
  fit_cmd->add_option("--dist", fit_args.dist, "Parametric family: exponential, weibull, lognormal, loglogistic");
  fit_cmd->add_option("--max-iter", fit_args.max_iter, "Newton iteration cap");
  fit_cmd->add_option("--n-trees", fit_args.n_trees, "Forest size");
  fit_cmd->add_option("--mtry", fit_args.mtry, "Covariates tried per split");
  fit_cmd->add_option("--nodesize", fit_args.nodesize, "Minimum rows per leaf");
  fit_cmd->add_option("--seed", fit_args.seed, "Seed for bootstrap and forest");
  fit_cmd->add_option("--bootstrap", fit_args.bootstrap, "Bootstrap replicates for CI bands");
  fit_cmd->add_option("--level", fit_args.level, "CI level");
  fit_cmd->add_option("--n-pred", fit_args.n_pred, "Predictor grid size");
  fit_cmd->add_option("--n-time", fit_args.n_time, "Maximum time grid size");
  fit_cmd->add_option("--bins", fit_args.bins, "Histogram bins");
  fit_cmd->add_option("--set", fit_args.set, "Adjuster override NAME=VALUE (repeatable)");
  fit_cmd->add_flag("--ci", fit_args.ci, "Add bootstrap CI bands");
  fit_cmd->add_flag("--surface3d", fit_args.surface3d, "Also write surface3d.json");
  fit_cmd->add_flag("--html", fit_args.html, "Also write report.html (implies surface3d.json)");

  DataArgs validate_data;
  CLI::App* validate_cmd = app.add_subcommand("validate", "Ingest a CSV and print the ingestion report");
  add_data_options(*validate_cmd, validate_data);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*fit_cmd) return fit_command(fit_data, fit_args, out);
    const IngestResult result = ingest(validate_data);
    out << dump(encode(result.report)) << "\n";
    return kOk;
  } catch (const SpecViolationError& e) {
    for (const auto& v : e.violations()) err << "error: " << v.field << ": " << v.message << "\n";
    return kValidation;
  } catch (const NonconvergenceError& e) {
    err << "error: " << e.what() << "\n";
    return kNonconvergence;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
}

}  // namespace survcontour::cli
