#include <benchmark/benchmark.h>

#include <cmath>
#include <string>

#include "survcontour/contour.hpp"
#include "survcontour/cox.hpp"
#include "survcontour/registry.hpp"
#include "survcontour/rng.hpp"
#include "survcontour/rsf.hpp"

using namespace survcontour;

namespace {

SurvivalDataset synthetic(std::size_t n, std::size_t p, std::uint64_t seed) {
  Rng rng(seed);
  ColumnRoles roles{"time", "status", "x0", {}, std::nullopt, 1};
  std::vector<Column> columns;
  std::vector<std::vector<double>> x(p, std::vector<double>(n));
  for (std::size_t k = 0; k < p; ++k) {
    for (auto& v : x[k]) v = rng.uniform01() * 2.0 - 1.0;
    if (k > 0) roles.adjusters.push_back("x" + std::to_string(k));
  }
  std::vector<double> time(n);
  std::vector<int> status(n);
  for (std::size_t i = 0; i < n; ++i) {
    double eta = 0.0;
    for (std::size_t k = 0; k < p; ++k) eta += 0.3 * x[k][i] / static_cast<double>(k + 1);
    const double t = -std::log(1.0 - rng.uniform01()) * std::exp(-eta);
    const double c = -std::log(1.0 - rng.uniform01()) * 2.0;
    time[i] = std::min(t, c);
    status[i] = t <= c ? 1 : 0;
  }
  for (std::size_t k = 0; k < p; ++k) columns.push_back(Column::continuous("x" + std::to_string(k), x[k]));
  return SurvivalDataset(roles, time, status, columns);
}

void BM_CoxFit(benchmark::State& state) {
  const auto data = synthetic(static_cast<std::size_t>(state.range(0)), 10, 42);
  for (auto _ : state) benchmark::DoNotOptimize(fit_cox(data, data.roles()));
}
BENCHMARK(BM_CoxFit)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_CoxSurface(benchmark::State& state) {
  const auto data = synthetic(2000, 5, 7);
  const CoxModel model(fit_cox(data, data.roles()));
  const auto profile = default_adjuster_profile(data);
  SurfaceOptions options;
  options.n_pred = 50;
  options.n_time = 200;
  for (auto _ : state) benchmark::DoNotOptimize(build_surface(model, data, profile, options));
}
BENCHMARK(BM_CoxSurface)->Unit(benchmark::kMillisecond);

void BM_RsfFit(benchmark::State& state) {
  const auto data = synthetic(500, 5, 3);
  ForestOptions options;
  options.n_trees = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(fit_rsf(data, data.roles(), options));
}
BENCHMARK(BM_RsfFit)->Arg(50)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
