#include "survcontour/bootstrap.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>

#include "survcontour/error.hpp"
#include "survcontour/rng.hpp"

namespace survcontour {

std::vector<std::size_t> bootstrap_rows(const SurvivalDataset& data, std::uint64_t seed, std::uint64_t index) {
  Rng rng = Rng::stream(seed, index);
  std::vector<std::size_t> rows;
  rows.reserve(data.size());
  if (const Column* strata = data.strata_column()) {
    std::vector<std::vector<std::size_t>> groups(strata->levels().size());
    for (std::size_t i = 0; i < data.size(); ++i) groups[static_cast<std::size_t>(strata->codes()[i])].push_back(i);
    for (const auto& g : groups) {
      for (std::size_t k = 0; k < g.size(); ++k) rows.push_back(g[rng.uniform_index(g.size())]);
    }
  } else {
    for (std::size_t k = 0; k < data.size(); ++k) rows.push_back(rng.uniform_index(data.size()));
  }
  return rows;
}

double quantile_type7(std::span<const double> values, double p) {
  if (values.empty()) throw ValidationError("quantile of an empty sample");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const double h = (static_cast<double>(v.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::min<std::size_t>(n, std::max(1u, std::thread::hardware_concurrency()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            body(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
          }
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

BootstrapEnsemble::BootstrapEnsemble(const SurvivalModel& model, const SurvivalDataset& data,
                                     const BootstrapOptions& options)
    : options_(options) {
  if (options.replicates < 2) throw ValidationError("bootstrap needs at least 2 replicates");
  if (!(options.level > 0.0 && options.level < 1.0)) throw ValidationError("bootstrap level must be in (0, 1)");
  const auto b = static_cast<std::size_t>(options.replicates);
  std::vector<std::unique_ptr<SurvivalModel>> fits(b);
  parallel_for(b, [&](std::size_t i) {
    const auto rows = bootstrap_rows(data, options.seed, i);
    try {
      fits[i] = model.refit(data.subset(rows));
    } catch (const Error&) {
      // counted below
    }
  });
  for (auto& f : fits) {
    if (f) models_.push_back(std::move(f));
    else ++failed_;
  }
  if (static_cast<double>(failed_) > options.max_failure_fraction * static_cast<double>(b)) {
    throw NonconvergenceError("bootstrap: " + std::to_string(failed_) + " of " + std::to_string(b) +
                              " resamples failed to fit");
  }
}

std::vector<std::vector<double>> BootstrapEnsemble::replicate_predictions(
    const CovariateValues& x, std::span<const double> times, const std::optional<std::string>& stratum) const {
  std::vector<std::vector<double>> out;
  out.reserve(models_.size());
  for (const auto& m : models_) out.push_back(m->predict(x, times, stratum).values);
  return out;
}

BootstrapEnsemble::Band BootstrapEnsemble::interval(const CovariateValues& x, std::span<const double> times,
                                                    const std::optional<std::string>& stratum) const {
  const auto reps = replicate_predictions(x, times, stratum);
  const double alpha = 1.0 - options_.level;
  Band band;
  band.lower.resize(times.size());
  band.upper.resize(times.size());
  std::vector<double> column(reps.size());
  for (std::size_t t = 0; t < times.size(); ++t) {
    for (std::size_t r = 0; r < reps.size(); ++r) column[r] = reps[r][t];
    band.lower[t] = quantile_type7(column, alpha / 2.0);
    band.upper[t] = quantile_type7(column, 1.0 - alpha / 2.0);
  }
  return band;
}

}  // namespace survcontour
