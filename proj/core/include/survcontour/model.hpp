#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "survcontour/dataset.hpp"

namespace survcontour {

enum class OutcomeKind { survival, cif };

const char* to_string(OutcomeKind kind);

// Predicted probabilities over a time grid.
struct Prediction {
  std::vector<double> values;
  // Per time: true when the time lies beyond the last knot of the underlying estimate.
  std::vector<bool> extrapolated;
  // Some value had to be clamped into [0, 1].
  bool clamped = false;
};

// Uniform prediction contract shared by every fitted family.
class SurvivalModel {
 public:
  virtual ~SurvivalModel() = default;

  virtual std::string family() const = 0;
  virtual OutcomeKind outcome_kind() const = 0;
  virtual const ColumnRoles& roles() const = 0;
  // Stratum levels for stratified fits, empty otherwise.
  virtual std::vector<std::string> strata() const { return {}; }

  // Survival S(t|x) or cumulative incidence, depending on outcome_kind(). Times ascending.
  // stratum is required iff strata() is non-empty.
  virtual Prediction predict(const CovariateValues& x, std::span<const double> times,
                             const std::optional<std::string>& stratum = std::nullopt) const = 0;

  // Larger means higher risk. horizon is the evaluation window used by families whose risk
  // score is time dependent.
  virtual double risk_score(const CovariateValues& x, const std::optional<std::string>& stratum,
                            double horizon) const = 0;

  virtual bool supports_ci() const { return true; }

  // Same family and options fitted to other data (bootstrap replicates).
  virtual std::unique_ptr<SurvivalModel> refit(const SurvivalDataset& data) const = 0;
};

}  // namespace survcontour
