#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "commands.hpp"

namespace {

void add_common(CLI::App& sub, vcg::cli::CommonOptions& common, std::uint64_t& seed) {
  sub.add_option("--out", common.out, "Output directory")->capture_default_str();
  sub.add_option("--seed", seed, "Random seed (simulate only; other commands are deterministic without one)");
  sub.add_option("--threads", common.threads, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
}

void add_fit_config(CLI::App& sub, vcg::FitConfig& fit, std::string& covariance) {
  sub.add_option("--threshold", fit.convergence_threshold, "Stop when the squared coefficient change is below this")
      ->capture_default_str();
  sub.add_option("--max-iter", fit.max_iterations, "Iteration cap")->capture_default_str();
  sub.add_option("--weight-floor", fit.weight_floor, "Relative floor on squared residuals")->capture_default_str();
  sub.add_option("--covariance", covariance, "sandwich | naive")
      ->check(CLI::IsMember({"sandwich", "naive"}))
      ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vcgrowth: varying-coefficient dynamic panel growth regressions"};
  app.set_config("--config", "", "Optional INI/TOML file with defaults; command-line flags win");
  app.require_subcommand(1);

  vcg::cli::CommonOptions common;
  for (int i = 0; i < argc; ++i) common.argv.emplace_back(argv[i]);
  std::uint64_t seed = 0;

  vcg::cli::PrepareOptions prep;
  auto* prepare = app.add_subcommand("prepare", "Build the model panel from raw series, income grids and CPI");
  add_common(*prepare, common, seed);
  prepare->add_option("--raw", prep.raw, "Raw series CSV (country, variable, year, value)")->required();
  prepare->add_option("--grids", prep.grids, "Income grid CSV (country, year, pop, c001..c100)")->required();
  prepare->add_option("--cpi", prep.cpi, "CPI CSV (country, year, cpi)")->required();
  prepare->add_option("--groups", prep.groups, "Group CSV (country, group)")->required();
  prepare->add_option("--first-year", prep.first_year)->capture_default_str();
  prepare->add_option("--last-year", prep.last_year)->capture_default_str();
  prepare->add_option("--hp-lambda", prep.hp_lambda, "HP smoothing penalty")->capture_default_str();
  prepare->add_option("--depreciation", prep.depreciation, "Added to population growth before the log")
      ->capture_default_str();
  prepare->add_option("--poverty-line", prep.poverty_line, "Poverty line per person per day")->capture_default_str();
  prepare->add_option("--poverty-cpi", prep.poverty_cpi, "Price level the poverty line is quoted in")
      ->capture_default_str();
  prepare->add_option("--output-name", prep.output_name)->capture_default_str();

  vcg::cli::FitOptions fopt;
  std::string fit_cov = "sandwich";
  bool no_fe = false;
  auto* fit = app.add_subcommand("fit", "Estimate the model and write coefficient, curve and group files");
  add_common(*fit, common, seed);
  fit->add_option("--panel", fopt.panel, "Panel CSV")->required();
  fit->add_option("--dep", fopt.deps, "y | y_poor | y_rich (repeatable)")->capture_default_str();
  fit->add_option("--lag", fopt.lag)->capture_default_str();
  add_fit_config(*fit, fopt.fit, fit_cov);
  fit->add_flag("--allow-nonconverged", fopt.allow_nonconverged, "Exit 0 and draw curves even without convergence");
  fit->add_flag("--no-fixed-effects", no_fe, "Drop the country dummies");
  fit->add_option("--degree", fopt.degree, "Polynomial degree of the driver basis")->capture_default_str();
  fit->add_option("--drivers", fopt.drivers, "Drivers entering the basis")->capture_default_str();
  fit->add_option("--points", fopt.points, "Curve grid points")->capture_default_str();
  fit->add_option("--level", fopt.level, "Pointwise band level")->capture_default_str();

  vcg::cli::SimulateOptions sopt;
  std::string sim_cov = "sandwich";
  std::size_t reps = 0;
  std::vector<double> grid;
  std::string estimator;
  bool sim_no_fe = false;
  auto* sim = app.add_subcommand("simulate", "Monte Carlo studies on the synthetic data-generating process");
  add_common(*sim, common, seed);
  auto* spec_opt = sim->add_option("--spec", "Simulation spec file (key = value, optional sections)");
  sim->add_option("--study", sopt.study, "recovery | variance | nickell")
      ->check(CLI::IsMember({"recovery", "variance", "nickell"}))
      ->capture_default_str();
  auto* reps_opt = sim->add_option("--replications", reps)->check(CLI::PositiveNumber);
  auto* grid_opt = sim->add_option("--rho-grid", grid, "Nickell study grid")->delimiter(',');
  auto* est_opt = sim->add_option("--estimator", estimator, "Nickell study: ols | iterated");
  sim->add_flag("--no-fixed-effects", sim_no_fe, "Fit without country dummies");
  add_fit_config(*sim, sopt.fit, sim_cov);

  auto* version = app.add_subcommand("version", "Print the version");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  auto covariance = [](const std::string& s) {
    return s == "naive" ? vcg::CovarianceKind::naive : vcg::CovarianceKind::sandwich;
  };
  auto seed_given = [&](CLI::App* sub) { return sub->get_option("--seed")->count() > 0; };

  if (*version) {
    vcg::cli::print_version(std::cout);
    return 0;
  }
  if (*prepare) return vcg::cli::run_prepare(common, prep, std::cout, std::cerr);
  if (*fit) {
    fopt.fit.covariance = covariance(fit_cov);
    fopt.fixed_effects = !no_fe;
    return vcg::cli::run_fit(common, fopt, std::cout, std::cerr);
  }
  if (seed_given(sim)) common.seed = seed;
  if (spec_opt->count()) sopt.spec = spec_opt->as<std::string>();
  if (reps_opt->count()) sopt.replications = reps;
  if (grid_opt->count()) sopt.rho_grid = grid;
  if (est_opt->count()) sopt.estimator = estimator;
  sopt.fit.covariance = covariance(sim_cov);
  sopt.fixed_effects = !sim_no_fe;
  return vcg::cli::run_simulate(common, sopt, std::cout, std::cerr);
}
