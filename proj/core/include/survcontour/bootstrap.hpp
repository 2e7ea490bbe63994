#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "survcontour/dataset.hpp"
#include "survcontour/model.hpp"

namespace survcontour {

struct BootstrapOptions {
  int replicates = 200;
  std::uint64_t seed = 1;
  double level = 0.95;
  // Fraction of failed refits above which the bootstrap is an error.
  double max_failure_fraction = 0.2;
};

// Row indices of replicate `index`: n draws with replacement, drawn within each stratum when the
// dataset is stratified. Uses Rng::stream(seed, index).
std::vector<std::size_t> bootstrap_rows(const SurvivalDataset& data, std::uint64_t seed, std::uint64_t index);

// Type-7 sample quantile of unsorted values, p in [0, 1].
double quantile_type7(std::span<const double> values, double p);

// Nonparametric bootstrap: resample rows, refit, and serve percentile intervals for any query.
class BootstrapEnsemble {
 public:
  BootstrapEnsemble(const SurvivalModel& model, const SurvivalDataset& data, const BootstrapOptions& options);

  struct Band {
    std::vector<double> lower;
    std::vector<double> upper;
  };

  Band interval(const CovariateValues& x, std::span<const double> times,
                const std::optional<std::string>& stratum = std::nullopt) const;
  // Replicate predictions, one row per surviving replicate.
  std::vector<std::vector<double>> replicate_predictions(const CovariateValues& x, std::span<const double> times,
                                                         const std::optional<std::string>& stratum) const;

  std::size_t replicates_used() const noexcept { return models_.size(); }
  std::size_t failed() const noexcept { return failed_; }
  const BootstrapOptions& options() const noexcept { return options_; }

 private:
  BootstrapOptions options_;
  std::vector<std::unique_ptr<SurvivalModel>> models_;
  std::size_t failed_ = 0;
};

// Runs body(i) for i in [0, n) on up to hardware_concurrency threads. Results must be written by index.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace survcontour
