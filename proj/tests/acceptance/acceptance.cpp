// Acceptance run: one PASS/FAIL line per criterion, exit status 1 when any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "cli.hpp"
#include "oracles.hpp"
#include "service.hpp"
#include "survcontour/bootstrap.hpp"
#include "survcontour/contour.hpp"
#include "survcontour/cox.hpp"
#include "survcontour/error.hpp"
#include "survcontour/fine_gray.hpp"
#include "survcontour/json.hpp"
#include "survcontour/metrics.hpp"
#include "survcontour/nonparametric.hpp"
#include "survcontour/parametric.hpp"
#include "survcontour/registry.hpp"
#include "survcontour/rsf.hpp"

// After Eigen: resolv.h defines _res.
#include <httplib.h>

using namespace survcontour;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

// Collects the first few failure reasons of one criterion.
struct Check {
  bool ok = true;
  std::vector<std::string> notes;

  void expect(bool condition, const std::string& what) {
    if (condition) return;
    ok = false;
    if (notes.size() < 5) notes.push_back(what);
  }
  void info(const std::string& what) { notes.push_back(what); }
};

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(3);
  s << v;
  return s.str();
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::vector<int> events_of(const oracle::Sample& s) {
  std::vector<int> e;
  for (int v : s.status) e.push_back(v == 1 ? 1 : 0);
  return e;
}

Eigen::MatrixXd to_matrix(const std::vector<std::vector<double>>& x) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(x.size()), x.empty() ? 0 : static_cast<Eigen::Index>(x[0].size()));
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t k = 0; k < x[i].size(); ++k) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = x[i][k];
  }
  return m;
}

double relative_error(const Eigen::VectorXd& analytic, const Eigen::VectorXd& numeric) {
  return (analytic - numeric).norm() / std::max(analytic.norm(), 1e-12);
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ColumnRoles veteran_roles() {
  ColumnRoles r;
  r.time_column = "time";
  r.status_column = "status";
  r.predictor = "karno";
  r.adjusters = {"age", "prior", "trt", "diagtime"};
  r.strata = "celltype";
  return r;
}

// ---------------------------------------------------------------------------------------------

Check partial_likelihood_oracle() {
  Check c;
  std::mt19937_64 rng(1001);
  std::uniform_int_distribution<int> size(3, 8);
  int accepted = 0, regenerated = 0;
  double worst = 0.0;
  while (accepted < 25) {
    const auto s = oracle::simulate(rng, static_cast<std::size_t>(size(rng)), {0.8}, 0.3);
    const auto ev = events_of(s);
    const auto f = [&](double b) { return oracle::partial_loglik(s.x, s.time, ev, {b}, true); };
    const double grid = oracle::grid_argmax(f, -5.0, 5.0, 1e-4);
    // An argmax on the boundary means the likelihood is monotone: the MLE is infinite.
    if (std::abs(grid) > 5.0 - 1e-3) {
      ++regenerated;
      continue;
    }
    ++accepted;
    try {
      const auto data = oracle::to_dataset(s);
      const auto fit = fit_cox(data, data.roles());
      const double err = std::abs(fit.beta(0) - grid);
      worst = std::max(worst, err);
      c.expect(err < 1e-3, "beta " + fmt(fit.beta(0)) + " vs grid " + fmt(grid));
    } catch (const std::exception& e) {
      c.expect(false, std::string("fit threw on a finite-MLE dataset: ") + e.what());
    }
  }
  c.info("max |beta - grid| " + fmt(worst) + ", " + std::to_string(regenerated) + " infinite-MLE draws regenerated");
  return c;
}

Check gradient_checks() {
  Check c;
  std::mt19937_64 rng(2002);
  std::normal_distribution<double> normal(0.0, 0.5);
  double worst_cox = 0.0, worst_fg = 0.0, worst_aft = 0.0;
  for (int rep = 0; rep < 10; ++rep) {
    const auto s = oracle::simulate(rng, 60, {0.5, -0.3, 0.2}, 0.4, 1, rep % 2 == 0);
    Eigen::VectorXd b(3);
    for (int k = 0; k < 3; ++k) b(k) = normal(rng);
    for (auto ties : {TiesMethod::efron, TiesMethod::breslow}) {
      CoxPartialLikelihood pl(to_matrix(s.x), s.time, events_of(s), std::vector<int>(s.time.size(), 0), ties);
      const double err = relative_error(pl.evaluate(b).gradient,
                                        finite_difference_gradient([&](const Eigen::VectorXd& v) { return pl.log_likelihood(v); }, b));
      worst_cox = std::max(worst_cox, err);
    }
  }
  for (int rep = 0; rep < 10; ++rep) {
    const auto s = oracle::simulate(rng, 60, {0.5, -0.3}, 0.5, 2, rep % 2 == 0);
    Eigen::VectorXd b(2);
    for (int k = 0; k < 2; ++k) b(k) = normal(rng);
    FineGrayLikelihood fg(to_matrix(s.x), s.time, s.status, 1, censoring_km(s.time, s.status));
    const double err = relative_error(fg.evaluate(b).gradient,
                                      finite_difference_gradient([&](const Eigen::VectorXd& v) { return fg.log_likelihood(v); }, b));
    worst_fg = std::max(worst_fg, err);
  }
  for (auto dist : {Distribution::exponential, Distribution::weibull, Distribution::lognormal, Distribution::loglogistic}) {
    for (int rep = 0; rep < 10; ++rep) {
      const auto s = oracle::simulate(rng, 60, {0.4, -0.6}, 0.4);
      Eigen::MatrixXd x = to_matrix(s.x);
      x.rowwise() -= x.colwise().mean();
      AftLikelihood lik(dist, x, s.time, events_of(s), std::nullopt);
      Eigen::VectorXd theta(lik.dimension());
      for (Eigen::Index k = 0; k < theta.size(); ++k) theta(k) = normal(rng);
      const double err = relative_error(
          lik.evaluate(theta).gradient,
          finite_difference_gradient([&](const Eigen::VectorXd& v) { return lik.log_likelihood(v); }, theta));
      worst_aft = std::max(worst_aft, err);
    }
  }
  c.expect(worst_cox < 1e-4, "cox " + fmt(worst_cox));
  c.expect(worst_fg < 1e-4, "fine-gray " + fmt(worst_fg));
  c.expect(worst_aft < 1e-4, "parametric " + fmt(worst_aft));
  c.info("max relative error cox " + fmt(worst_cox) + ", fine-gray " + fmt(worst_fg) + ", parametric " + fmt(worst_aft));
  return c;
}

Check nonparametric_oracles() {
  Check c;
  auto near = [&](double a, double b, double tol, const std::string& what) {
    c.expect(std::abs(a - b) <= tol, what + ": " + fmt(a) + " vs " + fmt(b));
  };
  {
    const std::vector<double> t{1, 2, 3, 4, 5};
    const std::vector<int> s{1, 0, 1, 0, 1};
    const auto km = kaplan_meier(t, s);
    near(km.survival(1.0), 0.8, 1e-10, "KM S(1)");
    near(km.survival(3.0), 0.8 * 2.0 / 3.0, 1e-10, "KM S(3)");
    near(km.survival(5.0), 0.0, 1e-10, "KM S(5)");
  }
  {
    const std::vector<double> t{1, 2, 3};
    const std::vector<int> s{1, 1, 1};
    near(nelson_aalen(t, s)(3.0), 1.0 / 3.0 + 1.0 / 2.0 + 1.0, 1e-10, "NA H(3)");
  }
  {
    const std::vector<double> t{1, 2, 3};
    const std::vector<int> s{1, 2, 1};
    const auto aj = aalen_johansen(t, s, 2);
    near(aj.cif[0](3.0), 2.0 / 3.0, 1e-10, "AJ CIF1(3)");
    near(aj.cif[1](3.0), 1.0 / 3.0, 1e-10, "AJ CIF2(3)");
  }
  std::mt19937_64 rng(3003);
  double worst = 0.0;
  for (int rep = 0; rep < 50; ++rep) {
    const int causes = 2 + rep % 3;
    const auto s = oracle::simulate(rng, 30 + static_cast<std::size_t>(rep), {0.3}, 0.5, causes, rep % 2 == 0);
    const auto aj = aalen_johansen(s.time, s.status, causes);
    for (double t : s.time) {
      double total = aj.overall_survival(t);
      for (const auto& f : aj.cif) total += f(t);
      worst = std::max(worst, std::abs(total - 1.0));
    }
  }
  c.expect(worst <= 1e-12, "normalization error " + fmt(worst));
  c.info("max |sum CIF + S - 1| over 50 datasets " + fmt(worst));
  return c;
}

Check reductions() {
  Check c;
  std::mt19937_64 rng(4004);
  double fg = 0.0, strat = 0.0, weib = 0.0, ties = 0.0;
  for (int rep = 0; rep < 5; ++rep) {
    const auto s = oracle::simulate(rng, 120, {0.6, -0.4}, 0.5);
    const auto data = oracle::to_dataset(s);
    CoxOptions breslow;
    breslow.ties = TiesMethod::breslow;
    const auto cox_b = fit_cox(data, data.roles(), breslow);
    const auto cox_e = fit_cox(data, data.roles());
    const auto fine_gray = fit_fine_gray(data, data.roles());
    fg = std::max(fg, (fine_gray.beta - cox_b.beta).cwiseAbs().maxCoeff());
    ties = std::max(ties, (cox_e.beta - cox_b.beta).cwiseAbs().maxCoeff());

    const auto one = oracle::to_dataset(s, std::vector<std::string>(s.time.size(), "only"));
    const auto stratified = fit_cox(one, one.roles());
    strat = std::max(strat, (stratified.beta - cox_e.beta).cwiseAbs().maxCoeff());
    strat = std::max(strat, std::abs(stratified.loglik - cox_e.loglik));

    ParametricOptions fixed;
    fixed.fixed_scale = 1.0;
    const auto w1 = fit_parametric(data, data.roles(), Distribution::weibull, fixed);
    const auto ex = fit_parametric(data, data.roles(), Distribution::exponential);
    weib = std::max(weib, std::abs(w1.loglik - ex.loglik));
    Eigen::MatrixXd x = to_matrix(s.x);
    x.rowwise() -= x.colwise().mean();
    AftLikelihood wl(Distribution::weibull, x, s.time, events_of(s), std::nullopt);
    AftLikelihood el(Distribution::exponential, x, s.time, events_of(s), std::nullopt);
    Eigen::VectorXd theta(wl.dimension());
    theta << 0.3, 0.2, -0.1, 0.0;
    const Eigen::VectorXd e_theta = theta.head(el.dimension());
    weib = std::max(weib, std::abs(wl.log_likelihood(theta) - el.log_likelihood(e_theta)));
  }
  c.expect(fg < 1e-8, "fine-gray vs cox " + fmt(fg));
  c.expect(strat < 1e-10, "one stratum vs cox " + fmt(strat));
  c.expect(weib < 1e-8, "weibull(1) vs exponential " + fmt(weib));
  c.expect(ties < 1e-10, "efron vs breslow " + fmt(ties));
  c.info("fine-gray " + fmt(fg) + ", one stratum " + fmt(strat) + ", weibull(1) " + fmt(weib) + ", efron/breslow " +
         fmt(ties));
  return c;
}

Check veterans_case() {
  Check c;
  const auto ingested = ingest_csv(read_file(std::string(SURVCONTOUR_TEST_DATA) + "/veteran.csv"), veteran_roles());
  c.expect(ingested.data.size() == 137, "rows " + std::to_string(ingested.data.size()));
  ModelSpec spec;
  spec.family = Family::stratified_cox;
  spec.roles = veteran_roles();
  const auto model = fit(spec, ingested.data);
  const auto& cox = dynamic_cast<const CoxModel&>(*model);
  c.expect(cox.fit().converged, "stratified cox did not converge");
  const auto profile = default_adjuster_profile(ingested.data, spec.roles);
  const auto surface = build_surface(*model, ingested.data, profile, {});
  c.expect(surface.panels.size() == 4, "panels " + std::to_string(surface.panels.size()));
  const double six_months = 365.25 / 2.0;
  for (const auto& panel : surface.panels) {
    CovariateValues x = profile.values();
    std::vector<double> at;
    for (double v : surface.predictor_grid) {
      x[spec.roles.predictor] = v;
      const std::vector<double> t{six_months};
      at.push_back(model->predict(x, t, panel.stratum).values[0]);
    }
    for (std::size_t r = 1; r < at.size(); ++r) {
      c.expect(at[r] >= at[r - 1], panel.stratum + " decreases at karno " + fmt(surface.predictor_grid[r]));
    }
    // The surface column nearest six months tells the same story.
    const auto& grid = panel.layer.time_grid;
    const std::size_t col = static_cast<std::size_t>(
        std::min_element(grid.begin(), grid.end(),
                         [&](double a, double b) { return std::abs(a - six_months) < std::abs(b - six_months); }) -
        grid.begin());
    for (std::size_t r = 1; r < surface.rows(); ++r) {
      c.expect(panel.layer.prob[r * grid.size() + col] >= panel.layer.prob[(r - 1) * grid.size() + col],
               panel.stratum + " surface column decreases");
    }
    c.info(panel.stratum + " S(6mo) " + fmt(at.front()) + "->" + fmt(at.back()));
  }
  return c;
}

Check non_monotone_recovery() {
  Check c;
  std::mt19937_64 rng(6006);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  oracle::Sample s;
  for (int i = 0; i < 2000; ++i) {
    const double x = -1.5 + 3.0 * unif(rng);
    const double hazard = 0.25 * std::exp(1.2 * x * x);
    const double t = -std::log(1.0 - unif(rng)) / hazard;
    const double censor = 0.5 + 2.5 * unif(rng);
    s.time.push_back(std::min(t, censor));
    s.status.push_back(t <= censor ? 1 : 0);
    s.x.push_back({x, normal(rng), normal(rng)});
  }
  const auto data = oracle::to_dataset(s);
  const auto profile = default_adjuster_profile(data);
  SurfaceOptions o;

  ForestOptions fo;
  fo.n_trees = 200;
  const auto t0 = Clock::now();
  const ForestModel forest(fit_rsf(data, data.roles(), fo));
  const auto rsf_surface = build_surface(forest, data, profile, o);
  const double rsf_seconds = seconds_since(t0);
  const CoxModel cox(fit_cox(data, data.roles()));
  const auto cox_surface = build_surface(cox, data, profile, o);

  auto column = [](const ContourSurface& s, double t) {
    const auto& grid = s.layer.time_grid;
    std::size_t col = 0;
    for (std::size_t k = 1; k < grid.size(); ++k) {
      if (std::abs(grid[k] - t) < std::abs(grid[col] - t)) col = k;
    }
    std::vector<double> out;
    for (std::size_t r = 0; r < s.rows(); ++r) out.push_back(s.layer.prob[r * grid.size() + col]);
    return out;
  };

  const std::vector<double> quantiles{quantile_type7(data.predictor_values(), 1.0 / 3.0),
                                      quantile_type7(data.predictor_values(), 2.0 / 3.0)};
  const auto rsf_col = column(rsf_surface, 1.0);
  const std::size_t best = static_cast<std::size_t>(std::max_element(rsf_col.begin(), rsf_col.end()) - rsf_col.begin());
  const double best_x = rsf_surface.predictor_grid[best];
  c.expect(best_x >= quantiles[0] && best_x <= quantiles[1],
           "rsf maximum at x=" + fmt(best_x) + " outside middle tercile [" + fmt(quantiles[0]) + ", " +
               fmt(quantiles[1]) + "]");

  const auto cox_col = column(cox_surface, 1.0);
  bool up = true, down = true;
  for (std::size_t r = 1; r < cox_col.size(); ++r) {
    up = up && cox_col[r] >= cox_col[r - 1];
    down = down && cox_col[r] <= cox_col[r - 1];
  }
  c.expect(up || down, "cox column is not monotone");
  c.expect(rsf_seconds < 60.0, "rsf fit + surface took " + fmt(rsf_seconds) + " s");
  c.info("rsf max S(1y) " + fmt(rsf_col[best]) + " at x=" + fmt(best_x) + ", ends " + fmt(rsf_col.front()) + "/" +
         fmt(rsf_col.back()) + "; rsf fit+surface " + fmt(rsf_seconds) + " s");
  return c;
}

Check metrics() {
  Check c;
  std::mt19937_64 rng(7007);
  int mismatches = 0;
  for (int rep = 0; rep < 50; ++rep) {
    const auto s = oracle::simulate(rng, 5 + static_cast<std::size_t>(rep), {0.7}, 0.5, 1, rep % 2 == 0);
    std::vector<double> score;
    for (const auto& row : s.x) score.push_back(std::round(row[0] * 2.0) / 2.0);
    const auto ev = events_of(s);
    const auto brute = oracle::brute_c_index(s.time, ev, score);
    if (brute.comparable == 0) continue;
    const auto fast = c_index(s.time, ev, score);
    if (fast.c_index != brute.c_index || fast.comparable_pairs != brute.comparable) ++mismatches;
  }
  c.expect(mismatches == 0, std::to_string(mismatches) + " c-index mismatches");

  double worst = 0.0, smallest_ibs = INFINITY;
  for (int rep = 0; rep < 10; ++rep) {
    const auto s = oracle::simulate(rng, 60, {0.7, -0.3}, 0.5);
    const auto data = oracle::to_dataset(s);
    const CoxModel model(fit_cox(data, data.roles()));
    const auto censoring = censoring_km(s.time, s.status);
    const double tau = default_tau(s.time, s.status, censoring);
    std::vector<double> grid = linspace(0.0, tau, 40);
    grid.back() = tau;
    std::vector<std::vector<double>> pred;
    for (const auto& row : s.x) pred.push_back(model.predict(CovariateValues{{"x0", row[0]}, {"x1", row[1]}}, grid, std::nullopt).values);
    const auto engine = integrated_brier(pred, s.time, s.status, grid, censoring);
    const auto direct = oracle::brier(pred, s.time, s.status, grid, 1);
    worst = std::max(worst, std::abs(engine.integrated - direct.integrated));
    smallest_ibs = std::min(smallest_ibs, engine.integrated);
  }
  c.expect(worst < 1e-10, "IBS error " + fmt(worst));
  c.expect(smallest_ibs > 0.0, "degenerate IBS");

  const std::vector<double> t{1, 2, 3, 4, 5, 6, 7, 8};
  const std::vector<int> e(8, 1);
  const std::vector<double> score{8, 7, 6, 5, 4, 3, 2, 1};
  const double perfect = c_index(t, e, score).c_index;
  c.expect(perfect == 1.0, "perfect concordance gives " + fmt(perfect));
  c.info("c-index exact on 50 datasets, max IBS error " + fmt(worst) + ", smallest IBS " + fmt(smallest_ibs));
  return c;
}

std::string competing_csv() {
  std::mt19937_64 rng(8008);
  const auto s = oracle::simulate(rng, 180, {0.7, -0.4}, 0.3, 2);
  std::vector<std::string> g;
  for (std::size_t i = 0; i < s.time.size(); ++i) g.push_back(i % 3 == 0 ? "red" : (i % 3 == 1 ? "green" : "blue"));
  return oracle::to_csv(s, g);
}

ColumnRoles competing_roles(bool strata) {
  ColumnRoles r = oracle::roles_for(2, strata);
  return r;
}

struct FamilyCase {
  std::string label;
  ModelSpec spec;
};

std::vector<FamilyCase> family_cases() {
  std::vector<FamilyCase> out;
  auto add = [&](const std::string& label, Family family, bool strata, auto tweak) {
    ModelSpec spec;
    spec.family = family;
    spec.roles = competing_roles(strata);
    spec.options.bootstrap_replicates = 20;
    tweak(spec.options);
    out.push_back({label, spec});
  };
  auto none = [](ModelOptions&) {};
  add("kaplan_meier", Family::kaplan_meier, false, none);
  add("cox", Family::cox, false, none);
  add("stratified_cox", Family::stratified_cox, true, none);
  for (auto d : {Distribution::exponential, Distribution::weibull, Distribution::lognormal, Distribution::loglogistic}) {
    add(std::string("parametric/") + to_string(d), Family::parametric, false,
        [d](ModelOptions& o) { o.distribution = d; });
  }
  add("fine_gray", Family::fine_gray, false, none);
  add("rsf", Family::rsf, false, [](ModelOptions& o) { o.n_trees = 40; });
  return out;
}

void check_layer(Check& c, const std::string& label, const SurvivalModel& model, const ContourSurface& s,
                 const SurfaceLayer& layer, const AdjusterProfile& profile, const std::optional<std::string>& stratum,
                 double max_time) {
  const std::size_t cols = layer.time_grid.size();
  c.expect(layer.prob.size() == s.rows() * cols, label + ": prob size");
  c.expect(!layer.time_grid.empty() && layer.time_grid.front() == 0.0, label + ": time grid does not start at 0");
  c.expect(!layer.time_grid.empty() && layer.time_grid.back() == max_time, label + ": time grid does not end at max follow-up");
  const bool cif = model.outcome_kind() == OutcomeKind::cif;
  for (std::size_t r = 0; r < s.rows(); ++r) {
    CovariateValues x = profile.values();
    x[s.predictor] = s.predictor_grid[r];
    const auto direct = model.predict(x, layer.time_grid, stratum).values;
    for (std::size_t k = 0; k < cols; ++k) {
      const double v = layer.prob[r * cols + k];
      c.expect(v == direct[k], label + ": cell differs from model prediction");
      c.expect(v >= 0.0 && v <= 1.0, label + ": value outside [0,1]");
      if (k > 0) {
        const double prev = layer.prob[r * cols + k - 1];
        c.expect(cif ? v >= prev : v <= prev, label + ": not monotone in time");
      }
      if (layer.lower) c.expect((*layer.lower)[r * cols + k] <= v && v <= (*layer.upper)[r * cols + k], label + ": CI excludes estimate");
    }
  }
}

Check surface_contract() {
  Check c;
  const std::string csv = competing_csv();
  for (const auto& fc : family_cases()) {
    const auto data = ingest_csv(csv, fc.spec.roles).data;
    const auto model = fit(fc.spec, data);
    const auto profile = default_adjuster_profile(data, fc.spec.roles);
    SurfaceOptions o;
    o.n_pred = 15;
    o.n_time = 40;
    o.ci = model->supports_ci() && fc.spec.family != Family::kaplan_meier;
    o.bootstrap = bootstrap_options(fc.spec);
    const auto s = build_surface(*model, data, profile, o);

    const auto& pred = data.predictor_values();
    c.expect(s.predictor_grid.front() == *std::min_element(pred.begin(), pred.end()), fc.label + ": grid start");
    c.expect(s.predictor_grid.back() == *std::max_element(pred.begin(), pred.end()), fc.label + ": grid end");
    std::size_t total = 0;
    for (auto n : s.histogram.counts) total += n;
    c.expect(total == data.size(), fc.label + ": histogram sums to " + std::to_string(total));
    c.expect(s.histogram.edges.front() == s.predictor_grid.front() && s.histogram.edges.back() == s.predictor_grid.back(),
             fc.label + ": histogram edges");

    if (s.stratified()) {
      const Column* strata = data.strata_column();
      std::size_t panel_rows = 0;
      for (const auto& p : s.panels) {
        double max_time = 0.0;
        for (std::size_t i = 0; i < data.size(); ++i) {
          if (strata->level_at(i) == p.stratum) max_time = std::max(max_time, data.time()[i]);
        }
        panel_rows += p.n;
        check_layer(c, fc.label + "/" + p.stratum, *model, s, p.layer, profile, p.stratum, max_time);
      }
      c.expect(panel_rows == data.size(), fc.label + ": panel sizes");
    } else {
      const double max_time = *std::max_element(data.time().begin(), data.time().end());
      check_layer(c, fc.label, *model, s, s.layer, profile, std::nullopt, max_time);
    }

    c.expect(decode_surface(Json::parse(dump(encode(s)))) == s, fc.label + ": surface JSON round trip");
    const auto q = build_quantile_curves(*model, data, profile, o);
    c.expect(decode_quantile_curves(Json::parse(dump(encode(q)))) == q, fc.label + ": quantile JSON round trip");
  }

  // CLI byte stability under a fixed seed, bootstrap and forest alike.
  const fs::path root = fs::temp_directory_path() / ("survcontour-acceptance-cli-" + std::to_string(::getpid()));
  fs::remove_all(root);
  fs::create_directories(root);
  {
    std::ofstream(root / "data.csv", std::ios::binary) << csv;
  }
  for (const std::vector<std::string>& extra :
       {std::vector<std::string>{"--family", "cox", "--ci", "--bootstrap", "25", "--seed", "11"},
        std::vector<std::string>{"--family", "rsf", "--n-trees", "30", "--seed", "11"}}) {
    std::vector<std::string> runs;
    for (int k = 0; k < 2; ++k) {
      const fs::path out = root / ("run" + std::to_string(k));
      std::vector<std::string> args{"fit",      "--data",        (root / "data.csv").string(), "--time", "time",
                                    "--status", "status",        "--predictor", "x0", "--adjusters", "x1",
                                    "--out",    out.string(),    "--html"};
      args.insert(args.end(), extra.begin(), extra.end());
      std::ostringstream sink_out, sink_err;
      const int code = cli::run(args, sink_out, sink_err);
      c.expect(code == 0, "cli exit " + std::to_string(code) + ": " + sink_err.str());
      std::string all;
      for (const char* name : {"contour.json", "quantiles.json", "metrics.json", "surface3d.json", "report.html"}) {
        all += read_file(out / name);
      }
      runs.push_back(all);
      fs::remove_all(out);
    }
    c.expect(!runs[0].empty() && runs[0] == runs[1], extra[1] + ": CLI outputs differ between runs");
  }
  fs::remove_all(root);
  c.info("9 fitted families checked, JSON round trips, CLI byte-stable");
  return c;
}

Check service_contract() {
  Check c;
  const fs::path dir = fs::temp_directory_path() / ("survcontour-acceptance-svc-" + std::to_string(::getpid()));
  fs::remove_all(dir);
  service::Config config;
  config.host = "127.0.0.1";
  config.port = 0;
  config.data_dir = dir;
  service::Service server(config);
  const int port = server.start();
  httplib::Client client("127.0.0.1", port);
  client.set_read_timeout(300, 0);
  auto status = [](const httplib::Result& r) { return r ? r->status : -1; };
  auto post = [&](const std::string& path, const Json& body) {
    return client.Post(path, dump(body), "application/json");
  };
  auto wait = [&](const std::string& job) {
    for (int i = 0; i < 6000; ++i) {
      auto r = client.Get("/jobs/" + job);
      if (status(r) != 200) return std::string("missing");
      const std::string state = Json::parse(r->body).at("state");
      if (state == "done" || state == "failed") return state;
      std::this_thread::sleep_for(std::chrono::milliseconds(20));
    }
    return std::string("timeout");
  };

  const std::string csv = competing_csv();
  const ColumnRoles upload_roles = competing_roles(true);
  auto uploaded = post("/datasets", Json{{"csv", csv}, {"roles", encode(upload_roles)}});
  c.expect(status(uploaded) == 201, "upload status " + std::to_string(status(uploaded)));
  if (status(uploaded) != 201) return c;
  const std::string dataset_id = Json::parse(uploaded->body).at("dataset_id");
  const auto base = ingest_csv(csv, upload_roles).data;

  for (const auto& fc : family_cases()) {
    Json body = encode(fc.spec);
    body["dataset_id"] = dataset_id;
    auto submitted = post("/models", body);
    c.expect(status(submitted) == 202, fc.label + ": submit " + std::to_string(status(submitted)));
    if (status(submitted) != 202) continue;
    const std::string job = Json::parse(submitted->body).at("job_id");
    c.expect(wait(job) == "done", fc.label + ": job did not finish");

    const auto model = fit(fc.spec, base);
    const auto data = with_roles(base, fc.spec.roles);
    const auto profile = default_adjuster_profile(data, fc.spec.roles);
    SurfaceOptions o;
    o.n_pred = 10;
    o.n_time = 30;
    o.bins = 6;
    o.bootstrap = bootstrap_options(fc.spec);
    const std::string q = "?n_pred=10&n_time=30&bins=6";
    const auto surface = build_surface(*model, data, profile, o);
    const std::vector<std::pair<std::string, std::string>> expected{
        {"contour", dump(encode(surface))},
        {"quantile-curves", dump(encode(build_quantile_curves(*model, data, profile, o)))},
        {"surface3d", dump(encode(to_surface3d(surface)))},
        {"metrics", dump(encode(evaluate_model(*model, data)))},
        {"km-split", dump(encode(median_split_km(data, fc.spec.roles)))}};
    for (const auto& [route, bytes] : expected) {
      auto got = client.Get("/models/" + job + "/" + route + q);
      c.expect(status(got) == 200 && got->body == bytes, fc.label + ": " + route + " differs from the engine");
    }
  }

  // Error-code table.
  Json cox = encode(family_cases()[1].spec);
  cox["dataset_id"] = dataset_id;
  c.expect(status(client.Post("/models", "{", "application/json")) == 400, "malformed body is not 400");
  c.expect(status(post("/models", Json{{"family", "cox"}})) == 400, "missing dataset_id is not 400");
  Json bad_family = cox;
  bad_family["family"] = "nonsense";
  c.expect(status(post("/models", bad_family)) == 400, "unknown family is not 400");
  c.expect(status(client.Get("/models/x/contour?n_pred=0")) == 400, "bad query is not 400");
  c.expect(status(client.Get("/datasets/unknown/summary")) == 404, "unknown dataset is not 404");
  c.expect(status(client.Get("/jobs/unknown")) == 404, "unknown job is not 404");
  c.expect(status(client.Get("/models/unknown/contour")) == 404, "unknown model is not 404");
  Json stratified_without = cox;
  stratified_without["family"] = "stratified_cox";
  stratified_without["roles"].erase("strata");
  c.expect(status(post("/models", stratified_without)) == 422, "spec/data mismatch is not 422");
  Json failing = cox;
  failing["options"]["max_iter"] = 1;
  auto failed = post("/models", failing);
  if (status(failed) == 202) {
    const std::string job = Json::parse(failed->body).at("job_id");
    c.expect(wait(job) == "failed", "max_iter=1 job did not fail");
    c.expect(status(client.Get("/models/" + job + "/contour")) == 409, "unusable model is not 409");
  } else {
    c.expect(false, "failing job not accepted");
  }
  server.stop();
  fs::remove_all(dir);
  c.info("flow and byte equality for 9 family configurations; 400/404/409/422 exercised");
  return c;
}

Check performance() {
  Check c;
  std::mt19937_64 rng(9009);
  std::vector<double> beta(10);
  for (std::size_t k = 0; k < beta.size(); ++k) beta[k] = 0.1 * static_cast<double>(k % 5) - 0.2;
  const auto s = oracle::simulate(rng, 10000, beta, 0.5);
  const auto data = oracle::to_dataset(s);
  auto t0 = Clock::now();
  const CoxModel model(fit_cox(data, data.roles()));
  const double fit_seconds = seconds_since(t0);
  SurfaceOptions o;
  o.n_pred = 50;
  o.n_time = 200;
  const auto profile = default_adjuster_profile(data);
  t0 = Clock::now();
  const auto surface = build_surface(model, data, profile, o);
  const double surface_seconds = seconds_since(t0);
  c.expect(surface.rows() == 50 && surface.layer.time_grid.size() == 200, "surface is not 50x200");
  c.expect(fit_seconds < 5.0, "cox fit " + fmt(fit_seconds) + " s");
  c.expect(surface_seconds < 0.5, "surface " + fmt(surface_seconds) + " s");
  c.info("cox fit 10000x10 " + fmt(fit_seconds) + " s, 50x200 surface " + fmt(surface_seconds) + " s");
  return c;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    double budget_seconds;  // 0 when the criterion carries no runtime bound
    std::function<Check()> run;
  };
  const std::vector<Criterion> criteria{
      {"partial-likelihood oracle", 10.0, partial_likelihood_oracle},
      {"gradient checks", 0.0, gradient_checks},
      {"nonparametric oracles", 0.0, nonparametric_oracles},
      {"reductions", 0.0, reductions},
      {"veterans stratified cox", 5.0, veterans_case},
      {"non-monotone recovery", 0.0, non_monotone_recovery},
      {"metrics", 0.0, metrics},
      {"surface contract", 0.0, surface_contract},
      {"service contract", 0.0, service_contract},
      {"performance", 0.0, performance},
  };
  int failures = 0;
  for (const auto& criterion : criteria) {
    const auto start = Clock::now();
    Check result;
    try {
      result = criterion.run();
    } catch (const std::exception& e) {
      result.ok = false;
      result.notes.push_back(std::string("threw: ") + e.what());
    }
    const double elapsed = seconds_since(start);
    if (criterion.budget_seconds > 0.0 && elapsed >= criterion.budget_seconds) {
      result.ok = false;
      result.notes.push_back("over the " + fmt(criterion.budget_seconds) + " s budget");
    }
    if (!result.ok) ++failures;
    std::string detail;
    for (const auto& n : result.notes) detail += (detail.empty() ? "" : "; ") + n;
    std::printf("%s  %-28s %8.3f s  %s\n", result.ok ? "PASS" : "FAIL", criterion.name, elapsed, detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
