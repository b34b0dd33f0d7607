#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "vcg/estimator.hpp"

namespace vcg::cli {

struct CommonOptions {
  std::filesystem::path out = "out";
  std::optional<std::uint64_t> seed;  // simulate: overrides the spec's seed
  unsigned threads = 1;
  std::vector<std::string> argv;      // echoed into the manifest
};

struct PrepareOptions {
  std::filesystem::path raw;
  std::filesystem::path grids;
  std::filesystem::path cpi;
  std::filesystem::path groups;  // CSV: country, group
  int first_year = 1970;
  int last_year = 2000;
  double hp_lambda = 6.25;
  double depreciation = 0.05;
  double poverty_line = 1.0;  // currency per person per day, reference prices
  double poverty_cpi = 1.0;   // reference-price level the line is quoted in
  std::string output_name = "panel.csv";
};

struct FitOptions {
  std::filesystem::path panel;
  std::vector<std::string> deps{"y"};
  int lag = 3;
  FitConfig fit;
  bool allow_nonconverged = false;
  bool fixed_effects = true;
  int degree = 2;
  std::vector<std::string> drivers{"pov", "gini", "middleclass"};
  std::size_t points = 200;
  double level = 0.95;
};

struct SimulateOptions {
  std::optional<std::filesystem::path> spec;
  std::string study = "recovery";  // recovery | variance | nickell
  std::optional<std::size_t> replications;
  std::optional<std::vector<double>> rho_grid;
  std::optional<std::string> estimator;  // nickell: ols | iterated
  bool fixed_effects = true;
  FitConfig fit;
};

/// Each command returns the process exit code: 0 on success, 1 when a
/// module-level error occurred (its name is printed to `err`).
int run_prepare(const CommonOptions& common, const PrepareOptions& opts, std::ostream& log, std::ostream& err);
int run_fit(const CommonOptions& common, const FitOptions& opts, std::ostream& log, std::ostream& err);
int run_simulate(const CommonOptions& common, const SimulateOptions& opts, std::ostream& log, std::ostream& err);
void print_version(std::ostream& out);

}  // namespace vcg::cli
