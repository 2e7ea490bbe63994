#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "survcontour/bootstrap.hpp"
#include "survcontour/cox.hpp"
#include "survcontour/dataset.hpp"
#include "survcontour/error.hpp"
#include "survcontour/model.hpp"
#include "survcontour/nonparametric.hpp"
#include "survcontour/parametric.hpp"

namespace survcontour {

enum class Family { kaplan_meier, cox, stratified_cox, parametric, fine_gray, rsf };

inline constexpr std::array<Family, 6> kAllFamilies{Family::kaplan_meier, Family::cox,       Family::stratified_cox,
                                                    Family::parametric,   Family::fine_gray, Family::rsf};

const char* to_string(Family family);
Family parse_family(std::string_view text);

// Family-specific knobs; fields irrelevant to a family are ignored.
struct ModelOptions {
  TiesMethod ties = TiesMethod::efron;
  Distribution distribution = Distribution::weibull;
  int max_iter = 25;
  double tol = 1e-9;
  int n_trees = 200;
  std::optional<int> mtry;
  int nodesize = 15;
  std::uint64_t seed = 1;
  int bootstrap_replicates = 200;
  double level = 0.95;

  bool operator==(const ModelOptions&) const = default;
};

struct ModelSpec {
  Family family = Family::cox;
  ColumnRoles roles;
  ModelOptions options;

  bool operator==(const ModelSpec&) const = default;
};

// Answers to the model-selection questions.
struct SelectionAnswers {
  bool competing_risks = false;
  bool wants_inference = false;
  bool wants_flexibility = false;
  bool has_strata = false;
};

struct Recommendation {
  // Supported families, best first.
  std::vector<Family> ranked;
  // Branches of the selection tree this build does not implement.
  std::vector<std::string> unsupported;
  std::vector<std::string> notes;
};

// Table-driven: competing risks -> fine_gray; strata -> stratified_cox; flexibility without
// inference -> rsf; flexibility with inference -> parametric; otherwise cox.
Recommendation recommend(const DatasetSummary& summary, const SelectionAnswers& answers);

// Every way the model specification conflicts with the data; empty when the pairing is valid.
std::vector<Violation> validate(const ModelSpec& spec, const SurvivalDataset& data);

// The dataset re-labelled with other roles over the same columns.
SurvivalDataset with_roles(const SurvivalDataset& data, const ColumnRoles& roles);

// Validates, then dispatches to the family's fitting routine. Throws SpecViolationError on violations.
std::unique_ptr<SurvivalModel> fit(const ModelSpec& spec, const SurvivalDataset& data);

BootstrapOptions bootstrap_options(const ModelSpec& spec);

// Pooled (or per-stratum) Kaplan-Meier curve; ignores covariates.
class KaplanMeierModel final : public SurvivalModel {
 public:
  KaplanMeierModel(const SurvivalDataset& data, ColumnRoles roles);

  std::string family() const override { return "kaplan_meier"; }
  OutcomeKind outcome_kind() const override { return OutcomeKind::survival; }
  const ColumnRoles& roles() const override { return roles_; }
  std::vector<std::string> strata() const override { return strata_levels_; }
  Prediction predict(const CovariateValues& x, std::span<const double> times,
                     const std::optional<std::string>& stratum) const override;
  double risk_score(const CovariateValues& x, const std::optional<std::string>& stratum,
                    double horizon) const override;
  std::unique_ptr<SurvivalModel> refit(const SurvivalDataset& data) const override;

  const KMEstimate& estimate(const std::optional<std::string>& stratum = std::nullopt) const;

 private:
  ColumnRoles roles_;
  std::vector<std::string> strata_levels_;
  std::vector<KMEstimate> estimates_;
};

}  // namespace survcontour
