// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any FAIL.
// Criterion 11 reports PASS or FLAG; a FLAG prints its justification and does
// not fail the run.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <unistd.h>
#include <vector>

#include <nlohmann/json.hpp>

#include "commands.hpp"
#include "oracles.hpp"
#include "vcg/curves.hpp"
#include "vcg/design.hpp"
#include "vcg/distribution.hpp"
#include "vcg/estimator.hpp"
#include "vcg/panel_store.hpp"
#include "vcg/preprocess.hpp"
#include "vcg/simulate.hpp"

namespace fs = std::filesystem;
using namespace vcg;

namespace {

enum class Verdict { pass, fail, flag };

struct Outcome {
  Verdict verdict = Verdict::fail;
  std::string detail;
};

unsigned worker_count() { return std::max(1u, std::thread::hardware_concurrency()); }

SimSpec moderate(std::size_t n, std::size_t T, int lag) {
  SimSpec s;
  s.n = n;
  s.T = T;
  s.lag = lag;
  s.rho = 0.93;
  s.sigma2 = 1e-4;
  s.lambda = Eigen::Vector3d(1e-4, 1e-4, 1e-4).asDiagonal();
  return s;
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

Outcome dimension_anchor() {
  SimSpec s = moderate(81, 31, 3);
  const Panel p = generate_panel(s, 0).panel;
  const StackedDesign d = build_stacked(lag_align(p, DependentVariable::y, 3));
  const bool ok = d.K == 3 && d.B == 7 && d.M() == 21 && d.rows() == 2268 && d.coefficients() == 103 &&
                  d.W.cols() == 21 && d.C.cols() == 81;
  return {ok ? Verdict::pass : Verdict::fail, "K=" + std::to_string(d.K) + " B=" + std::to_string(d.B) + " M=" +
                                                   std::to_string(d.M()) + " rows=" + std::to_string(d.rows()) +
                                                   " coefficients=" + std::to_string(d.coefficients())};
}

Outcome convergence_arithmetic() {
  const Panel p = generate_panel(moderate(81, 31, 3), 0).panel;
  const StackedDesign d = build_stacked(lag_align(p, DependentVariable::y, 3));
  const FitConfig cfg;
  const FitResult fit = fit_iterated(d, cfg);
  const double implied = cfg.convergence_threshold / static_cast<double>(d.coefficients());
  const double final_mean = fit.trace.empty() ? INFINITY : fit.trace.back() / static_cast<double>(d.coefficients());
  // "approximately 0.00005": the implied bound rounds to 5e-5 at one significant figure.
  const bool approx = std::abs(implied - 5e-5) / 5e-5 < 0.05;
  const bool ok = fit.converged && implied < 4.9e-5 && approx && final_mean < 4.9e-5;
  return {ok ? Verdict::pass : Verdict::fail,
          "converged=" + std::string(fit.converged ? "yes" : "no") + " iterations=" + std::to_string(fit.iterations) +
              fmt(" bound 0.005/103=%.4g", implied) + fmt(" final mean squared change=%.3g", final_mean)};
}

Outcome noiseless_recovery() {
  SimSpec s = moderate(81, 31, 3);
  s.lambda.setZero();
  s.sigma2 = 0.0;
  const SimPanel sp = generate_panel(s, 0);
  const FitResult fit = fit_iterated(build_stacked(lag_align(sp.panel, DependentVariable::y, 3)));
  Eigen::VectorXd truth(fit.theta.size());
  truth << sp.truth.rho, sp.truth.eta, sp.truth.gamma;
  const double err = (fit.theta - truth).cwiseAbs().maxCoeff();
  const bool ok = err < 1e-8 && fit.iterations == 1 && fit.converged;
  return {ok ? Verdict::pass : Verdict::fail,
          fmt("max |theta - truth| = %.3g", err) + " iterations=" + std::to_string(fit.iterations)};
}

Outcome monte_carlo_recovery() {
  StudyOptions opts;
  opts.threads = worker_count();
  std::vector<SimResult> runs;
  for (std::size_t n : {20u, 40u, 80u}) runs.push_back(recovery_study(moderate(n, 20, 1), 200, opts));
  std::size_t monotone = 0;
  for (std::size_t j = 1; j < runs[0].summary.size(); ++j) {
    const double a = runs[0].summary[j].median_abs_error;
    const double b = runs[1].summary[j].median_abs_error;
    const double c = runs[2].summary[j].median_abs_error;
    if (a > b && b > c) ++monotone;
  }
  const std::size_t M = runs[0].summary.size() - 1;
  const auto& rho = runs[1].summary[0];
  std::size_t failures = 0;
  for (const auto& r : runs) failures += r.failures;
  const bool ok = monotone == M && failures == 0;
  return {ok ? Verdict::pass : Verdict::fail,
          std::to_string(monotone) + "/" + std::to_string(M) + " gamma components with decreasing median |error|" +
              fmt("; rho bias at n=40: %.4g", rho.bias) + fmt(" (MC s.e. %.2g)", rho.mc_se) +
              "; fit failures=" + std::to_string(failures)};
}

Outcome variance_structure() {
  SimSpec s = moderate(40, 20, 1);
  s.lambda = Eigen::Vector3d(2e-4, 1e-4, 5e-4).asDiagonal();
  const VarianceReport rep = variance_structure_check(s, 1000, worker_count());
  const bool ok = rep.cell_pass_fraction >= 0.95 && rep.pair_pass_fraction >= 0.95 &&
                  rep.max_reconstruction_error < 1e-10;
  return {ok ? Verdict::pass : Verdict::fail,
          fmt("cells within 3 s.e.: %.1f%%", 100.0 * rep.cell_pass_fraction) +
              fmt("; off-diagonal pairs within 3 s.e. of 0: %.1f%%", 100.0 * rep.pair_pass_fraction) +
              fmt("; pooled relative error %.3g", rep.pooled_relative_error)};
}

Outcome gini_oracle() {
  std::mt19937_64 rng(2016);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const IncomeGrid g = oracle::random_grid(rng);
    worst = std::max(worst, std::abs(gini(g) - oracle::pairwise_gini(g.centiles)));
  }
  return {worst < 1e-10 ? Verdict::pass : Verdict::fail, fmt("max |gini - pairwise| over 1000 grids = %.3g", worst)};
}

Outcome distribution_identities() {
  IncomeGrid flat;
  flat.country = "EQ";
  flat.year = 2000;
  flat.pop = 1e6;
  flat.centiles.fill(730.0);
  const double g = gini(flat), t = theil(flat), mc = middle_class_share(flat);
  const double yp = quintile_log_mean(flat, Quintile::bottom), yr = quintile_log_mean(flat, Quintile::top);
  bool ok = std::abs(g) < 1e-12 && std::abs(t) < 1e-12 && std::abs(mc - 0.6) < 1e-12 && yp == yr;

  std::mt19937_64 rng(7);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const IncomeGrid r = oracle::random_grid(rng);
    const double sum = oracle::centile_share(r, 1, 20) + middle_class_share(r) + oracle::centile_share(r, 81, 100);
    worst = std::max(worst, std::abs(sum - 1.0));
  }
  ok = ok && worst < 1e-12;
  return {ok ? Verdict::pass : Verdict::fail, fmt("equal grid: gini=%.2g", g) + fmt(" theil=%.2g", t) +
                                                  fmt(" middleclass=%.15g", mc) + fmt(" y_poor-y_rich=%.2g", yp - yr) +
                                                  fmt("; max |share sum - 1| = %.2g", worst)};
}

Outcome hp_filter() {
  double linear = 0.0;
  for (double lambda : {1e-3, 6.25, 100.0, 1600.0, 1e5}) {
    for (std::size_t m : {3u, 7u, 31u, 200u}) {
      std::vector<double> x(m);
      for (std::size_t t = 0; t < m; ++t) x[t] = 2.5 - 0.37 * static_cast<double>(t);
      const auto tau = hp_trend(x, {lambda});
      for (std::size_t t = 0; t < m; ++t) linear = std::max(linear, std::abs(tau[t] - x[t]));
    }
  }
  std::mt19937_64 rng(11);
  std::normal_distribution<double> N(0.0, 1.0);
  double dense = 0.0;
  for (double lambda : {0.5, 6.25, 100.0, 1600.0}) {
    for (std::size_t m = 3; m <= 10; ++m) {
      std::vector<double> x(m);
      for (auto& v : x) v = N(rng);
      const auto tau = hp_trend(x, {lambda});
      const auto ref = oracle::dense_hp(x, lambda);
      for (std::size_t t = 0; t < m; ++t) dense = std::max(dense, std::abs(tau[t] - ref[t]));
    }
  }
  const bool ok = linear < 1e-10 && dense < 1e-10;
  return {ok ? Verdict::pass : Verdict::fail,
          fmt("linear series max change %.3g", linear) + fmt("; short series vs dense solve %.3g", dense)};
}

SimSpec heteroscedastic() {
  SimSpec s = moderate(40, 20, 1);
  s.lambda = Eigen::Vector3d(4e-4, 2e-4, 2e-4).asDiagonal();
  return s;
}

Outcome weighting_efficiency() {
  StudyOptions opts;
  opts.threads = worker_count();
  const SimResult r = recovery_study(heteroscedastic(), 200, opts);
  std::size_t better = 0;
  std::vector<double> ratio;
  for (std::size_t j = 1; j < r.summary.size(); ++j) {
    if (r.summary[j].sd <= r.ols_summary[j].sd) ++better;
    ratio.push_back(std::pow(r.summary[j].sd / r.ols_summary[j].sd, 2));
  }
  std::sort(ratio.begin(), ratio.end());
  const bool ok = better >= 18;
  return {ok ? Verdict::pass : Verdict::fail,
          std::to_string(better) + "/21 gamma components with Var(weighted) <= Var(OLS)" +
              fmt("; median variance ratio %.3g", ratio[ratio.size() / 2]) + "; nonconverged=" +
              std::to_string(r.nonconverged)};
}

Outcome size_control() {
  SimSpec s = heteroscedastic();
  // lnsk:gini^2 is set to zero; its test is the size probe.
  const std::size_t probe = 7 + 4;
  s.gamma(static_cast<Eigen::Index>(probe)) = 0.0;
  StudyOptions opts;
  opts.threads = worker_count();
  const SimResult r = recovery_study(s, 500, opts);
  const double rate = rejection_rate(r, 1 + probe, 0.05);
  const bool ok = rate >= 0.03 && rate <= 0.07;
  return {ok ? Verdict::pass : Verdict::fail,
          "coefficient " + r.names[1 + probe] + fmt(": rejection rate at 5%% = %.3f", rate) + " over " +
              std::to_string(r.replications.size() - r.failures) + " replications"};
}

Outcome nickell_flag() {
  SimSpec s = moderate(81, 31, 3);
  NickellOptions opts;
  opts.study.threads = worker_count();
  const auto rows = nickell_bias_study({0.93}, s, 200, opts);
  const auto& row = rows.front();
  std::string largest, tightest;
  double largest_bias = -1.0, tightest_excess = -INFINITY;
  for (const auto& o : row.others) {
    const double excess = std::abs(o.bias) - (opts.benchmark + 3.0 * o.mc_se);
    if (excess > tightest_excess) {
      tightest_excess = excess;
      tightest = o.name;
    }
    if (std::abs(o.bias) > largest_bias) {
      largest_bias = std::abs(o.bias);
      largest = o.name;
    }
  }
  std::string detail = fmt("rho bias %.4g", row.rho_bias) + fmt(" (MC s.e. %.2g)", row.rho_mc_se) +
                       fmt("; max |non-rho bias| %.3g", largest_bias) + " (" + largest + ")" +
                       "; closest to its limit: " + tightest + fmt(" (|bias| - limit = %.3g)", tightest_excess);
  if (row.pass) return {Verdict::pass, detail};
  detail +=
      ". Justification: with country dummies and T-l=28 the lagged dependent variable is correlated with the "
      "demeaned error, and that bias is passed on to coefficients whose regressors are correlated with y_lag; "
      "the 3e-4 figure is an analytic statement for the original data, not a property of this DGP.";
  return {Verdict::flag, detail};
}

std::map<std::string, std::string> output_bytes(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    std::string bytes = s.str();
    if (e.path().filename() == "manifest.json") {
      // Wall-clock timing is the one field that legitimately differs.
      auto j = nlohmann::json::parse(bytes);
      j.erase("timing");
      bytes = j.dump();
    }
    out[fs::relative(e.path(), dir).string()] = std::move(bytes);
  }
  return out;
}

Outcome pipeline_determinism() {
  const fs::path root = fs::temp_directory_path() / ("vcg_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(root);
  const fs::path fixtures = VCG_FIXTURES_DIR;
  std::ostringstream log, err;
  auto run_all = [&](const fs::path& base, unsigned threads) {
    cli::CommonOptions c;
    c.threads = threads;
    c.argv = {"vcgrowth"};
    cli::PrepareOptions p;
    p.raw = fixtures / "raw.csv";
    p.grids = fixtures / "grids.csv";
    p.cpi = fixtures / "cpi.csv";
    p.groups = fixtures / "groups.csv";
    c.out = base / "prepare";
    int rc = cli::run_prepare(c, p, log, err);
    cli::FitOptions f;
    f.panel = base / "prepare" / "panel.csv";
    f.deps = {"y", "y_poor", "y_rich"};
    // Five countries are too few for the reweighting to settle on y_poor and
    // y_rich; the converged flag is still written and compared.
    f.allow_nonconverged = true;
    c.out = base / "fit";
    rc |= cli::run_fit(c, f, log, err);
    cli::SimulateOptions s;
    s.spec = fixtures / "sim_small.ini";
    c.out = base / "simulate";
    c.seed = 424242;
    rc |= cli::run_simulate(c, s, log, err);
    return rc;
  };
  // Both runs use the same directory so that recorded paths match too.
  const fs::path base = root / "run";
  const int rc1 = run_all(base, 1);
  const auto a = output_bytes(base);
  fs::remove_all(base);
  const int rc2 = run_all(base, std::max(2u, worker_count()));
  const auto b = output_bytes(base);
  Outcome out;
  if (rc1 != 0 || rc2 != 0) {
    out.detail = "a command failed: " + err.str();
    return out;
  }
  std::size_t differing = 0;
  std::string names;
  for (const auto& [name, bytes] : a) {
    auto it = b.find(name);
    if (it == b.end() || it->second != bytes) {
      ++differing;
      names += " " + name;
    }
  }
  const bool ok = a.size() == b.size() && differing == 0 && !a.empty();
  fs::remove_all(root);
  out.verdict = ok ? Verdict::pass : Verdict::fail;
  out.detail = std::to_string(a.size()) + " files compared across two runs (1 vs " +
               std::to_string(std::max(2u, worker_count())) + " threads), " + std::to_string(differing) +
               " differ (manifest timing excluded)" + (names.empty() ? std::string() : ":" + names);
  return out;
}

struct Criterion {
  int id;
  const char* title;
  double limit_seconds;
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "dimension anchor", 1.0, dimension_anchor},
      {2, "convergence arithmetic", 30.0, convergence_arithmetic},
      {3, "noiseless exact recovery", 10.0, noiseless_recovery},
      {4, "Monte Carlo recovery", 600.0, monte_carlo_recovery},
      {5, "variance structure", 600.0, variance_structure},
      {6, "Gini oracle", 5.0, gini_oracle},
      {7, "distribution identities", 5.0, distribution_identities},
      {8, "HP filter", 5.0, hp_filter},
      {9, "weighting efficiency", 600.0, weighting_efficiency},
      {10, "size control", 600.0, size_control},
      {11, "Nickell flag", 600.0, nickell_flag},
      {12, "pipeline determinism", 600.0, pipeline_determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {Verdict::fail, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs > c.limit_seconds && o.verdict != Verdict::fail) {
      o.verdict = Verdict::fail;
      o.detail += fmt("; runtime limit %.0f s exceeded", c.limit_seconds);
    }
    const char* tag = o.verdict == Verdict::pass ? "PASS" : o.verdict == Verdict::flag ? "FLAG" : "FAIL";
    if (o.verdict == Verdict::fail) ++failed;
    std::printf("%s %2d %s: %s [%.2f s]\n", tag, c.id, c.title, o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed ? 1 : 0;
}
