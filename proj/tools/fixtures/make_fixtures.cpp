// Writes the synthetic fixture files under the given directory:
//   synthetic81.csv            81 x 31 model panel drawn from the simulation DGP
//   raw.csv grids.csv cpi.csv groups.csv   inputs for `vcgrowth prepare`
//   cpi_missing.csv            cpi.csv with one entry removed
//   sim_small.ini              a small simulation spec
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

#include <boost/math/distributions/normal.hpp>

#include "vcg/csv.hpp"
#include "vcg/distribution.hpp"
#include "vcg/panel_store.hpp"
#include "vcg/sim_spec_io.hpp"
#include "vcg/simulate.hpp"

namespace fs = std::filesystem;
using vcg::csv::format_double;
using vcg::csv::write_row;

namespace {

struct CountrySeed {
  const char* code;
  const char* group;
  double gdp;     // GDP per worker in 1970, reference prices
  double sigma;   // log-income dispersion
  double growth;  // trend growth
};

constexpr CountrySeed kCountries[] = {
    {"ARG", "Latin", 18000, 0.95, 0.010}, {"BGD", "Asia", 2200, 0.55, 0.020}, {"GHA", "SSA", 2600, 0.80, 0.005},
    {"IND", "Asia", 2500, 0.65, 0.030},   {"KEN", "SSA", 2400, 0.90, 0.008}, {"NLD", "HI", 42000, 0.50, 0.018},
};
constexpr int kFirst = 1970;
constexpr int kLast = 2000;
constexpr const char* kDroppedCountry = "KEN";
constexpr int kDroppedYear = 1985;

std::ofstream open(const fs::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  return out;
}

void write_inputs(const fs::path& dir) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> N(0.0, 1.0);
  const boost::math::normal unit;

  auto raw = open(dir / "raw.csv");
  auto grids = open(dir / "grids.csv");
  auto cpi = open(dir / "cpi.csv");
  auto cpi_missing = open(dir / "cpi_missing.csv");
  auto groups = open(dir / "groups.csv");
  write_row(raw, {"country", "variable", "year", "value"});
  std::vector<std::string> gh{"country", "year", "pop"};
  for (int j = 1; j <= 100; ++j) {
    char b[8];
    std::snprintf(b, sizeof b, "c%03d", j);
    gh.emplace_back(b);
  }
  write_row(grids, gh);
  write_row(cpi, {"country", "year", "cpi"});
  write_row(cpi_missing, {"country", "year", "cpi"});
  write_row(groups, {"country", "group"});

  for (const auto& c : kCountries) {
    write_row(groups, {c.code, c.group});
    double pop = 1e7 * (1.0 + 3.0 * std::abs(N(rng)));
    for (int y = kFirst; y <= kLast; ++y) {
      const double t = y - kFirst;
      const double price = 2.0 - 0.03 * t;  // multiply by this to reach reference prices
      const double gdp = c.gdp * std::exp(c.growth * t + 0.03 * std::sin(t / 2.0) + 0.01 * N(rng));
      const double g = 0.02 + 0.005 * std::sin(t / 3.0) + 0.001 * N(rng);
      const double inv = 0.15 + 0.03 * std::sin(t / 4.0) + 0.005 * N(rng);
      pop *= 1.0 + g;
      // Raw GDP is in current prices; prepare rebases it with the CPI.
      write_row(raw, {c.code, "gdp_per_worker", std::to_string(y), format_double(gdp / price)});
      write_row(raw, {c.code, "pop_growth", std::to_string(y), format_double(g)});
      write_row(raw, {c.code, "inv_share", std::to_string(y), format_double(inv)});
      if ((y - kFirst) % 5 == 0) {
        write_row(raw, {c.code, "attainment", std::to_string(y), format_double(2.0 + 0.1 * t + 0.05 * N(rng))});
      }
      write_row(cpi, {c.code, std::to_string(y), format_double(price)});
      if (!(std::string(c.code) == "ARG" && y == 1990)) {
        write_row(cpi_missing, {c.code, std::to_string(y), format_double(price)});
      }
      if (std::string(c.code) == kDroppedCountry && y == kDroppedYear) continue;
      const double sigma = c.sigma * (1.0 + 0.05 * std::sin(t / 5.0));
      const double mean_income = 0.6 * gdp / price;
      std::vector<std::string> row{c.code, std::to_string(y), format_double(std::round(pop))};
      for (int j = 1; j <= 100; ++j) {
        const double q = boost::math::quantile(unit, (j - 0.5) / 100.0);
        row.push_back(format_double(mean_income * std::exp(sigma * q - 0.5 * sigma * sigma)));
      }
      write_row(grids, row);
    }
  }
}

void write_synthetic81(const fs::path& dir) {
  vcg::SimSpec spec;
  spec.n = 81;
  spec.T = 31;
  spec.lag = 3;
  spec.lambda = Eigen::Vector3d(1e-4, 1e-4, 1e-4).asDiagonal();
  const vcg::SimPanel sp = vcg::generate_panel(spec, 0);
  auto out = open(dir / "synthetic81.csv");
  vcg::write_panel(out, sp.panel);
}

void write_sim_small(const fs::path& dir) {
  vcg::SimSpec spec;
  spec.n = 10;
  spec.T = 12;
  spec.lag = 1;
  spec.lambda = Eigen::Vector3d(1e-4, 5e-5, 5e-5).asDiagonal();
  auto out = open(dir / "sim_small.ini");
  vcg::write_sim_spec(out, spec);
  out << "\n[study]\nreplications = 20\nrho_grid = 0.91, 0.93, 0.95, 0.97\n";
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2 || argv[1][0] == '-') {
    std::cerr << "usage: vcg_make_fixtures <dir>\n";
    return 2;
  }
  const fs::path dir = argv[1];
  fs::create_directories(dir);
  try {
    write_inputs(dir);
    write_synthetic81(dir);
    write_sim_small(dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
