#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "survcontour/dataset.hpp"
#include "survcontour/model.hpp"
#include "survcontour/step_function.hpp"

namespace survcontour {

struct ForestOptions {
  int n_trees = 200;
  // Default ceil(sqrt(#covariates)).
  std::optional<int> mtry;
  int nodesize = 15;
  std::uint64_t seed = 1;
};

struct TreeNode {
  int variable = -1;  // -1 marks a leaf
  bool categorical = false;
  double threshold = 0.0;  // continuous: value <= threshold goes left
  int level = -1;          // categorical: code == level goes left
  int left = -1;
  int right = -1;
  int leaf = -1;  // index into SurvivalTree::leaf_chf
};

struct SurvivalTree {
  std::vector<TreeNode> nodes;
  // Nelson-Aalen cumulative hazard of each leaf's in-bag rows; knots are pooled event times.
  std::vector<StepFunction> leaf_chf;
  // In-bag rows (canonical indexing, sorted, with multiplicity).
  std::vector<std::size_t> in_bag;

  std::size_t leaf_for(std::span<const double> features) const;
};

// Feature layout shared by fitting and prediction: continuous values or categorical codes.
struct ForestFeature {
  std::string name;
  bool categorical = false;
  std::vector<std::string> levels;
};

struct ForestFit {
  ColumnRoles roles;
  std::vector<ForestFeature> features;
  std::vector<SurvivalTree> trees;
  int mtry = 1;
  int nodesize = 15;
  std::uint64_t seed = 1;
  std::vector<double> event_times;  // pooled distinct event times
  // Harrell's C of out-of-bag mortality; NaN when no comparable out-of-bag pairs exist.
  double oob_c_index = 0.0;
  ForestOptions options;

  std::vector<double> encode(const CovariateValues& x) const;
  // Forest restricted to trees [first, first + count).
  ForestFit subforest(std::size_t first, std::size_t count) const;
};

ForestFit fit_rsf(const SurvivalDataset& data, const ColumnRoles& roles, const ForestOptions& options = {});

// Mean of leaf cumulative hazards over trees.
std::vector<double> ensemble_chf(const ForestFit& fit, const CovariateValues& x, std::span<const double> times);

// S(t|x) = exp(-ensemble CHF(t|x)); constant beyond the last pooled event time.
Prediction predict_survival_rsf(const ForestFit& fit, const CovariateValues& x, std::span<const double> times);

// One admissible split examined by the tree builder.
struct SplitCandidate {
  double threshold = 0.0;   // continuous splits
  int level = -1;           // categorical one-vs-rest splits
  double statistic = 0.0;   // squared standardized two-sample log-rank statistic
  std::vector<bool> left;   // membership per node row, in input order
};

// Every admissible split of one variable on one node, as the tree builder scores them. A split is
// admissible when both children keep >= nodesize rows and >= 1 event. `values` holds continuous
// values or categorical codes.
std::vector<SplitCandidate> scan_splits(std::span<const double> values, bool categorical,
                                        std::span<const double> time, std::span<const int> event,
                                        std::size_t nodesize);

class ForestModel final : public SurvivalModel {
 public:
  explicit ForestModel(ForestFit fit) : fit_(std::move(fit)) {}

  std::string family() const override { return "rsf"; }
  OutcomeKind outcome_kind() const override { return OutcomeKind::survival; }
  const ColumnRoles& roles() const override { return fit_.roles; }
  Prediction predict(const CovariateValues& x, std::span<const double> times,
                     const std::optional<std::string>& stratum) const override;
  // Ensemble cumulative hazard at horizon / 2.
  double risk_score(const CovariateValues& x, const std::optional<std::string>& stratum,
                    double horizon) const override;
  bool supports_ci() const override { return false; }
  std::unique_ptr<SurvivalModel> refit(const SurvivalDataset& data) const override;

  const ForestFit& fit() const noexcept { return fit_; }

 private:
  ForestFit fit_;
};

}  // namespace survcontour
