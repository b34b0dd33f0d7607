#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace vcg {

inline constexpr std::size_t kCentiles = 100;

/// A country-year income distribution: population and the mean income of
/// each population centile, poorest first.
struct IncomeGrid {
  std::string country;
  int year = 0;
  double pop = 0.0;
  std::array<double, kCentiles> centiles{};
};

struct GridCheck {
  bool resorted = false;
  double max_disorder = 0.0;  // largest drop between consecutive centiles before sorting
};

/// Validates a grid and sorts centiles that arrive out of order. Drops no
/// larger than 1e-9 are treated as rounding noise; `resorted` is set only when
/// a larger drop had to be repaired, so callers can warn. Throws InvalidGrid
/// for negative or non-finite cells, non-positive population, or an all-zero grid.
GridCheck normalize_grid(IncomeGrid& grid);

/// Piecewise-linear Lorenz curve with knots at p = j/100, j = 0..100.
class LorenzCurve {
 public:
  explicit LorenzCurve(const std::array<double, kCentiles + 1>& knots) : g_(knots) {}

  /// Cumulative income share at knot j (j = 0..100).
  [[nodiscard]] double knot(std::size_t j) const { return g_[j]; }
  /// Linear interpolation between knots; p is clamped to [0,1].
  [[nodiscard]] double operator()(double p) const;
  [[nodiscard]] const std::array<double, kCentiles + 1>& knots() const noexcept { return g_; }

 private:
  std::array<double, kCentiles + 1> g_;
};

/// Throws ZeroTotalIncome.
[[nodiscard]] LorenzCurve lorenz(const IncomeGrid& grid);

/// 1 - 2 * area under the Lorenz polygon.
[[nodiscard]] double gini(const IncomeGrid& grid);

/// (1/100) sum (x/mu) ln(x/mu). Throws ZeroIncomeCell if any centile is 0.
[[nodiscard]] double theil(const IncomeGrid& grid);

/// Fraction of the population whose centile mean income is strictly below
/// 365 * line_per_day * cpi_factor. Centiles count as whole 1% blocks.
[[nodiscard]] double poverty_headcount(const IncomeGrid& grid, double line_per_day = 1.0, double cpi_factor = 1.0);

/// G(0.8) - G(0.2).
[[nodiscard]] double middle_class_share(const IncomeGrid& grid);

enum class Quintile { bottom, top };

/// Log mean per-capita income of the bottom or top fifth of the population,
/// scaled by cpi_factor. Throws ZeroQuintileIncome.
[[nodiscard]] double quintile_log_mean(const IncomeGrid& grid, Quintile which, double cpi_factor = 1.0);

/// Grid CSV: country, year, pop, c001..c100.
[[nodiscard]] std::vector<IncomeGrid> read_grids(std::istream& in, std::string_view source = "<stream>");
[[nodiscard]] std::vector<IncomeGrid> read_grids(const std::filesystem::path& path);
void write_grids(std::ostream& out, const std::vector<IncomeGrid>& grids);

}  // namespace vcg
