#include "survcontour/registry.hpp"

#include <algorithm>
#include <set>

#include "survcontour/fine_gray.hpp"
#include "survcontour/rsf.hpp"

namespace survcontour {

const char* to_string(Family family) {
  switch (family) {
    case Family::kaplan_meier: return "kaplan_meier";
    case Family::cox: return "cox";
    case Family::stratified_cox: return "stratified_cox";
    case Family::parametric: return "parametric";
    case Family::fine_gray: return "fine_gray";
    case Family::rsf: return "rsf";
  }
  return "unknown";
}

Family parse_family(std::string_view text) {
  for (Family f : kAllFamilies) {
    if (text == to_string(f)) return f;
  }
  throw ValidationError("unknown model family '" + std::string(text) + "'");
}

Recommendation recommend(const DatasetSummary& summary, const SelectionAnswers& answers) {
  Family first = Family::cox;
  if (answers.competing_risks) {
    first = Family::fine_gray;
  } else if (answers.has_strata) {
    first = Family::stratified_cox;
  } else if (answers.wants_flexibility) {
    first = answers.wants_inference ? Family::parametric : Family::rsf;
  }

  Recommendation r;
  r.ranked.push_back(first);
  for (Family f : {Family::cox, Family::stratified_cox, Family::parametric, Family::rsf, Family::fine_gray,
                   Family::kaplan_meier}) {
    if (f != first) r.ranked.push_back(f);
  }
  r.unsupported = {"interval-censored data", "Fine-Gray with interval censoring", "deep-learning survival models"};

  std::size_t causes = 0;
  for (const auto& [code, count] : summary.events_by_cause) causes += count > 0 ? 1 : 0;
  if (answers.competing_risks && causes < 2) {
    r.notes.push_back("competing risks requested but the data contain a single event cause");
  }
  if (!answers.competing_risks && causes >= 2) {
    r.notes.push_back("the data contain several event causes; other causes are treated as censoring");
  }
  if (answers.has_strata && summary.strata_levels.empty()) {
    r.notes.push_back("strata requested but no strata column is assigned");
  }
  return r;
}

SurvivalDataset with_roles(const SurvivalDataset& data, const ColumnRoles& roles) {
  if (roles.time_column != data.roles().time_column || roles.status_column != data.roles().status_column) {
    throw ValidationError("time and status columns must match the dataset");
  }
  return SurvivalDataset(roles, data.time(), data.status(), data.columns());
}

std::vector<Violation> validate(const ModelSpec& spec, const SurvivalDataset& data) {
  std::vector<Violation> out;
  const ColumnRoles& roles = spec.roles;
  const ModelOptions& o = spec.options;
  try {
    (void)with_roles(data, roles);
  } catch (const ValidationError& e) {
    out.push_back({"roles", e.what()});
    return out;
  }

  const auto& status = data.status();
  const auto cause_events = static_cast<std::size_t>(std::count(status.begin(), status.end(), roles.cause_of_interest));
  std::set<int> causes;
  for (int s : status) {
    if (s != 0) causes.insert(s);
  }
  if (cause_events == 0) {
    out.push_back({"roles.cause_of_interest", "no events of cause " + std::to_string(roles.cause_of_interest)});
  }

  const bool stratified = roles.strata.has_value();
  switch (spec.family) {
    case Family::stratified_cox:
      if (!stratified) out.push_back({"roles.strata", "stratified_cox requires a strata column"});
      break;
    case Family::cox:
      if (stratified) out.push_back({"roles.strata", "cox does not take strata; use stratified_cox"});
      break;
    case Family::fine_gray:
      if (causes.size() < 2) out.push_back({"family", "fine_gray requires at least two event causes in the data"});
      if (stratified) out.push_back({"roles.strata", "fine_gray does not support strata"});
      break;
    case Family::parametric:
      if (stratified) out.push_back({"roles.strata", "parametric does not support strata"});
      break;
    case Family::rsf: {
      if (stratified) out.push_back({"roles.strata", "rsf does not support strata"});
      const auto p = static_cast<int>(roles.covariates().size());
      if (o.n_trees < 1) out.push_back({"options.n_trees", "must be >= 1"});
      if (o.mtry && (*o.mtry < 1 || *o.mtry > p)) {
        out.push_back({"options.mtry", "must be between 1 and the number of covariates (" + std::to_string(p) + ")"});
      }
      if (o.nodesize < 1) out.push_back({"options.nodesize", "must be >= 1"});
      if (cause_events < 2) out.push_back({"roles.cause_of_interest", "rsf needs at least 2 events"});
      break;
    }
    case Family::kaplan_meier:
      break;
  }
  if (o.max_iter < 1) out.push_back({"options.max_iter", "must be >= 1"});
  if (!(o.tol > 0.0)) out.push_back({"options.tol", "must be positive"});
  if (o.bootstrap_replicates < 2) out.push_back({"options.bootstrap_replicates", "must be >= 2"});
  if (!(o.level > 0.0 && o.level < 1.0)) out.push_back({"options.level", "must lie in (0, 1)"});
  return out;
}

std::unique_ptr<SurvivalModel> fit(const ModelSpec& spec, const SurvivalDataset& data) {
  if (auto violations = validate(spec, data); !violations.empty()) throw SpecViolationError(std::move(violations));
  const SurvivalDataset relabelled = with_roles(data, spec.roles);
  const ModelOptions& o = spec.options;
  switch (spec.family) {
    case Family::kaplan_meier:
      return std::make_unique<KaplanMeierModel>(relabelled, spec.roles);
    case Family::cox:
    case Family::stratified_cox: {
      CoxOptions cox;
      cox.ties = o.ties;
      cox.max_iter = o.max_iter;
      cox.tol = o.tol;
      return std::make_unique<CoxModel>(fit_cox(relabelled, spec.roles, cox));
    }
    case Family::parametric: {
      ParametricOptions p;
      p.max_iter = o.max_iter;
      p.tol = o.tol;
      return std::make_unique<ParametricModel>(fit_parametric(relabelled, spec.roles, o.distribution, p));
    }
    case Family::fine_gray: {
      FineGrayOptions fg;
      fg.max_iter = o.max_iter;
      fg.tol = o.tol;
      return std::make_unique<FineGrayModel>(fit_fine_gray(relabelled, spec.roles, fg));
    }
    case Family::rsf: {
      ForestOptions f;
      f.n_trees = o.n_trees;
      f.mtry = o.mtry;
      f.nodesize = o.nodesize;
      f.seed = o.seed;
      return std::make_unique<ForestModel>(fit_rsf(relabelled, spec.roles, f));
    }
  }
  throw ValidationError("unknown model family");
}

BootstrapOptions bootstrap_options(const ModelSpec& spec) {
  BootstrapOptions b;
  b.replicates = spec.options.bootstrap_replicates;
  b.seed = spec.options.seed;
  b.level = spec.options.level;
  return b;
}

KaplanMeierModel::KaplanMeierModel(const SurvivalDataset& data, ColumnRoles roles) : roles_(std::move(roles)) {
  const auto events = data.event_indicator(roles_.cause_of_interest);
  auto estimate_rows = [&](const std::vector<std::size_t>& rows) {
    std::vector<double> t;
    std::vector<int> e;
    for (auto r : rows) {
      t.push_back(data.time()[r]);
      e.push_back(events[r]);
    }
    if (rows.empty()) {
      KMEstimate empty;
      empty.survival = StepFunction({}, {}, 1.0);
      empty.all_censored = true;
      return empty;
    }
    return kaplan_meier(t, e);
  };
  if (roles_.strata) {
    const Column& sc = data.column(*roles_.strata);
    strata_levels_ = sc.levels();
    std::vector<std::vector<std::size_t>> rows(strata_levels_.size());
    for (std::size_t i = 0; i < data.size(); ++i) rows[static_cast<std::size_t>(sc.codes()[i])].push_back(i);
    for (const auto& r : rows) estimates_.push_back(estimate_rows(r));
  } else {
    std::vector<std::size_t> all(data.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    estimates_.push_back(estimate_rows(all));
  }
}

const KMEstimate& KaplanMeierModel::estimate(const std::optional<std::string>& stratum) const {
  if (strata_levels_.empty()) {
    if (stratum) throw ValidationError("stratum given for an unstratified fit");
    return estimates_.front();
  }
  if (!stratum) throw ValidationError("stratum required for a stratified fit");
  auto it = std::find(strata_levels_.begin(), strata_levels_.end(), *stratum);
  if (it == strata_levels_.end()) throw ValidationError("unknown stratum level '" + *stratum + "'");
  return estimates_[static_cast<std::size_t>(it - strata_levels_.begin())];
}

Prediction KaplanMeierModel::predict(const CovariateValues&, std::span<const double> times,
                                     const std::optional<std::string>& stratum) const {
  const StepFunction& s = estimate(stratum).survival;
  Prediction p;
  for (double t : times) {
    p.values.push_back(s(t));
    p.extrapolated.push_back(s.empty() ? false : t > s.last_knot());
  }
  return p;
}

double KaplanMeierModel::risk_score(const CovariateValues&, const std::optional<std::string>& stratum,
                                    double horizon) const {
  return 1.0 - estimate(stratum).survival(horizon);
}

std::unique_ptr<SurvivalModel> KaplanMeierModel::refit(const SurvivalDataset& data) const {
  return std::make_unique<KaplanMeierModel>(data, roles_);
}

}  // namespace survcontour
