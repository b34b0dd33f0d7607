#include "vcg/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <ostream>

#include "vcg/csv.hpp"
#include "vcg/error.hpp"

namespace vcg {

namespace {

constexpr double kSortTolerance = 1e-9;

std::string label(const IncomeGrid& g) { return g.country + "/" + std::to_string(g.year); }

void validate(const IncomeGrid& g) {
  if (!(g.pop > 0.0) || !std::isfinite(g.pop)) throw Error(ErrorCode::InvalidGrid, label(g) + ": population must be positive");
  bool any_positive = false;
  for (std::size_t j = 0; j < kCentiles; ++j) {
    const double v = g.centiles[j];
    if (!std::isfinite(v) || v < 0.0) {
      throw Error(ErrorCode::InvalidGrid, label(g) + ": centile " + std::to_string(j + 1) + " is negative or not finite");
    }
    any_positive = any_positive || v > 0.0;
    if (j > 0 && v < g.centiles[j - 1] - kSortTolerance) {
      throw Error(ErrorCode::InvalidGrid, label(g) + ": centiles not sorted (call normalize_grid)");
    }
  }
  if (!any_positive) throw Error(ErrorCode::ZeroTotalIncome, label(g) + ": all centiles are zero");
}

double total(const IncomeGrid& g) { return std::accumulate(g.centiles.begin(), g.centiles.end(), 0.0); }

}  // namespace

GridCheck normalize_grid(IncomeGrid& grid) {
  GridCheck check;
  for (std::size_t j = 1; j < kCentiles; ++j) {
    check.max_disorder = std::max(check.max_disorder, grid.centiles[j - 1] - grid.centiles[j]);
  }
  if (check.max_disorder > 0.0) {
    std::sort(grid.centiles.begin(), grid.centiles.end());
    check.resorted = check.max_disorder > kSortTolerance;
  }
  validate(grid);
  return check;
}

double LorenzCurve::operator()(double p) const {
  p = std::clamp(p, 0.0, 1.0);
  const double pos = p * static_cast<double>(kCentiles);
  const auto j = std::min<std::size_t>(static_cast<std::size_t>(pos), kCentiles - 1);
  const double frac = pos - static_cast<double>(j);
  return g_[j] + frac * (g_[j + 1] - g_[j]);
}

LorenzCurve lorenz(const IncomeGrid& grid) {
  validate(grid);
  const double sum = total(grid);
  if (!(sum > 0.0)) throw Error(ErrorCode::ZeroTotalIncome, label(grid));
  std::array<double, kCentiles + 1> g{};
  double running = 0.0;
  for (std::size_t j = 0; j < kCentiles; ++j) {
    running += grid.centiles[j];
    g[j + 1] = running / sum;
  }
  g[kCentiles] = 1.0;
  return LorenzCurve(g);
}

double gini(const IncomeGrid& grid) {
  const auto curve = lorenz(grid);
  // Trapezoid rule is exact on the piecewise-linear curve.
  double area2 = 0.0;
  for (std::size_t j = 1; j <= kCentiles; ++j) area2 += curve.knot(j - 1) + curve.knot(j);
  return 1.0 - area2 / static_cast<double>(kCentiles);
}

double theil(const IncomeGrid& grid) {
  validate(grid);
  const double mu = total(grid) / static_cast<double>(kCentiles);
  double acc = 0.0;
  for (std::size_t j = 0; j < kCentiles; ++j) {
    const double x = grid.centiles[j];
    if (!(x > 0.0)) {
      throw Error(ErrorCode::ZeroIncomeCell, label(grid) + ": centile " + std::to_string(j + 1) + " has zero income");
    }
    const double r = x / mu;
    acc += r * std::log(r);
  }
  return std::max(0.0, acc / static_cast<double>(kCentiles));
}

double poverty_headcount(const IncomeGrid& grid, double line_per_day, double cpi_factor) {
  validate(grid);
  if (!(line_per_day > 0.0) || !(cpi_factor > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "poverty line and CPI factor must be positive");
  }
  const double threshold = 365.0 * line_per_day * cpi_factor;
  const auto below = std::count_if(grid.centiles.begin(), grid.centiles.end(), [&](double v) { return v < threshold; });
  return static_cast<double>(below) / static_cast<double>(kCentiles);
}

double middle_class_share(const IncomeGrid& grid) {
  const auto curve = lorenz(grid);
  return curve.knot(80) - curve.knot(20);
}

double quintile_log_mean(const IncomeGrid& grid, Quintile which, double cpi_factor) {
  if (!(cpi_factor > 0.0)) throw Error(ErrorCode::InvalidArgument, "CPI factor must be positive");
  const auto curve = lorenz(grid);
  const double total_income = grid.pop * total(grid) / static_cast<double>(kCentiles);
  const double share = which == Quintile::bottom ? curve.knot(20) : 1.0 - curve.knot(80);
  const double income = cpi_factor * total_income * share;
  if (!(income > 0.0)) {
    throw Error(ErrorCode::ZeroQuintileIncome,
                label(grid) + (which == Quintile::bottom ? ": bottom" : ": top") + " quintile has zero income");
  }
  return std::log(income / (0.2 * grid.pop));
}

std::vector<IncomeGrid> read_grids(std::istream& in, std::string_view source) {
  const auto t = csv::Table::parse(in, source);
  const auto c_country = t.require("country");
  const auto c_year = t.require("year");
  const auto c_pop = t.require("pop");
  std::array<std::size_t, kCentiles> cols{};
  for (std::size_t j = 0; j < kCentiles; ++j) {
    char name[8];
    std::snprintf(name, sizeof(name), "c%03zu", j + 1);
    cols[j] = t.require(name);
  }
  std::vector<IncomeGrid> out;
  out.reserve(t.rows());
  for (std::size_t r = 0; r < t.rows(); ++r) {
    IncomeGrid g;
    g.country = t.cell(r, c_country);
    g.year = static_cast<int>(t.integer(r, c_year));
    g.pop = t.number(r, c_pop);
    for (std::size_t j = 0; j < kCentiles; ++j) g.centiles[j] = t.number(r, cols[j]);
    out.push_back(std::move(g));
  }
  return out;
}

std::vector<IncomeGrid> read_grids(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return read_grids(in, path.string());
}

void write_grids(std::ostream& out, const std::vector<IncomeGrid>& grids) {
  std::vector<std::string> header{"country", "year", "pop"};
  for (std::size_t j = 0; j < kCentiles; ++j) {
    char name[8];
    std::snprintf(name, sizeof(name), "c%03zu", j + 1);
    header.emplace_back(name);
  }
  csv::write_row(out, header);
  for (const auto& g : grids) {
    std::vector<std::string> row{g.country, std::to_string(g.year), csv::format_double(g.pop)};
    for (double v : g.centiles) row.push_back(csv::format_double(v));
    csv::write_row(out, row);
  }
}

}  // namespace vcg
