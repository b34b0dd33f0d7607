#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace vcg {

/// Hodrick-Prescott smoothing penalty. 6.25 is the usual annual-frequency value.
struct HpConfig {
  double lambda = 6.25;
};

/// HP trend of an ordered series: the minimizer of
///   sum (x_t - tau_t)^2 + lambda * sum (tau_{t+1} - 2 tau_t + tau_{t-1})^2,
/// obtained by a banded Cholesky solve of (I + lambda D'D) tau = x.
/// Throws SeriesTooShort (< 3 values), NonFiniteInput, InvalidConfig (lambda <= 0).
[[nodiscard]] std::vector<double> hp_trend(std::span<const double> series, const HpConfig& cfg = {});

/// A raw source series, possibly sparse in time.
struct RawSeries {
  std::string country;
  std::string variable;
  std::map<int, double> values;  // year -> value
};

/// Variable tags recognised in the raw long-format file.
namespace raw_vars {
inline constexpr std::string_view gdp_per_worker = "gdp_per_worker";
inline constexpr std::string_view pop_growth = "pop_growth";
inline constexpr std::string_view inv_share = "inv_share";
inline constexpr std::string_view attainment = "attainment";
}  // namespace raw_vars

enum class SplineBoundary { natural, not_a_knot };

/// Interpolating cubic spline through strictly increasing knots.
class CubicSpline {
 public:
  CubicSpline(std::vector<double> knots, std::vector<double> values, SplineBoundary boundary = SplineBoundary::natural);

  /// Outside the knot span the value is clamped to the nearest knot value.
  [[nodiscard]] double operator()(double x) const;
  [[nodiscard]] const std::vector<double>& second_derivatives() const noexcept { return m_; }

 private:
  std::vector<double> x_;
  std::vector<double> y_;
  std::vector<double> m_;
};

/// Yearly values over [first_year, last_year] from a sparse series via a cubic
/// interpolating spline; knot years are reproduced exactly. Throws TooFewKnots
/// for fewer than three knots.
[[nodiscard]] std::vector<double> spline_impute(const RawSeries& sparse, int first_year, int last_year,
                                                SplineBoundary boundary = SplineBoundary::natural);

using CpiTable = std::map<std::pair<std::string, int>, double>;

struct PreprocessConfig {
  HpConfig hp;
  double depreciation = 0.05;  // capital depreciation + productivity growth
};

/// Model columns for one country over a contiguous year range.
struct CountryVariables {
  std::string country;
  int first_year = 0;
  std::vector<double> y;
  std::vector<double> lnn;
  std::vector<double> lnsk;
  std::vector<double> lnattain;
};

/// Builds y, lnn, lnsk, lnattain for `country` from yearly series in `raw`
/// (attainment already imputed):
///   y        = HP(ln(cpi * gdp_per_worker))
///   lnn      = ln(depreciation + pop_growth)
///   lnsk     = HP(ln(inv_share))
///   lnattain = ln(attainment)
/// Throws MissingSeries (absent variable, year or CPI entry) and NonPositiveForLog.
[[nodiscard]] CountryVariables build_variables(const std::string& country, const std::vector<RawSeries>& raw,
                                               const CpiTable& cpi, int first_year, int last_year,
                                               const PreprocessConfig& cfg = {});

/// Long-format raw series CSV: country, variable, year, value. Empty values
/// are treated as absent.
[[nodiscard]] std::vector<RawSeries> read_raw_series(std::istream& in, std::string_view source = "<stream>");
[[nodiscard]] std::vector<RawSeries> read_raw_series(const std::filesystem::path& path);

/// CPI CSV: country, year, cpi.
[[nodiscard]] CpiTable read_cpi(std::istream& in, std::string_view source = "<stream>");
[[nodiscard]] CpiTable read_cpi(const std::filesystem::path& path);

}  // namespace vcg
