#include "vcg/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "vcg/csv.hpp"
#include "vcg/error.hpp"

namespace vcg {

std::vector<double> hp_trend(std::span<const double> series, const HpConfig& cfg) {
  const std::size_t n = series.size();
  if (n < 3) throw Error(ErrorCode::SeriesTooShort, "HP filter needs at least 3 observations, got " + std::to_string(n));
  if (!(cfg.lambda > 0.0) || !std::isfinite(cfg.lambda)) {
    throw Error(ErrorCode::InvalidConfig, "HP lambda must be positive and finite");
  }
  for (std::size_t t = 0; t < n; ++t) {
    if (!std::isfinite(series[t])) throw Error(ErrorCode::NonFiniteInput, "HP input not finite at index " + std::to_string(t));
  }

  // Bands of A = I + lambda D'D: a0 diagonal, a1 first and a2 second sub-diagonal.
  // Extended precision: A has condition number near 1 + 16 lambda and a double
  // solve visibly bends exactly linear input at large lambda.
  using real = long double;
  std::vector<real> a0(n, 1.0L), a1(n, 0.0L), a2(n, 0.0L);
  const real lam = cfg.lambda;
  for (std::size_t r = 0; r + 2 < n; ++r) {
    const real d[3] = {1.0L, -2.0L, 1.0L};
    for (int p = 0; p < 3; ++p) {
      a0[r + p] += lam * d[p] * d[p];
      if (p >= 1) a1[r + p] += lam * d[p] * d[p - 1];
      if (p == 2) a2[r + p] += lam * d[p] * d[0];
    }
  }

  // Banded Cholesky A = L L' with L(i,i) = l0, L(i,i-1) = l1, L(i,i-2) = l2.
  std::vector<real> l0(n), l1(n, 0.0L), l2(n, 0.0L);
  for (std::size_t i = 0; i < n; ++i) {
    if (i >= 2) l2[i] = a2[i] / l0[i - 2];
    if (i >= 1) l1[i] = (a1[i] - (i >= 2 ? l2[i] * l1[i - 1] : 0.0L)) / l0[i - 1];
    l0[i] = std::sqrt(a0[i] - l1[i] * l1[i] - l2[i] * l2[i]);
  }

  std::vector<real> z(series.begin(), series.end());
  for (std::size_t i = 0; i < n; ++i) {
    real s = z[i];
    if (i >= 1) s -= l1[i] * z[i - 1];
    if (i >= 2) s -= l2[i] * z[i - 2];
    z[i] = s / l0[i];
  }
  for (std::size_t k = n; k-- > 0;) {
    real s = z[k];
    if (k + 1 < n) s -= l1[k + 1] * z[k + 1];
    if (k + 2 < n) s -= l2[k + 2] * z[k + 2];
    z[k] = s / l0[k];
  }
  std::vector<double> tau(n);
  for (std::size_t i = 0; i < n; ++i) tau[i] = static_cast<double>(z[i]);
  return tau;
}

namespace {

// Thomas algorithm; sub[i] couples row i to i-1, sup[i] to i+1.
std::vector<double> solve_tridiagonal(std::vector<double> sub, std::vector<double> diag, std::vector<double> sup,
                                      std::vector<double> rhs) {
  const std::size_t n = diag.size();
  for (std::size_t i = 1; i < n; ++i) {
    const double w = sub[i] / diag[i - 1];
    diag[i] -= w * sup[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  std::vector<double> x(n);
  x[n - 1] = rhs[n - 1] / diag[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) x[i] = (rhs[i] - sup[i] * x[i + 1]) / diag[i];
  return x;
}

}  // namespace

CubicSpline::CubicSpline(std::vector<double> knots, std::vector<double> values, SplineBoundary boundary)
    : x_(std::move(knots)), y_(std::move(values)) {
  const std::size_t m = x_.size();
  if (m != y_.size()) throw Error(ErrorCode::DimensionMismatch, "spline knots and values differ in length");
  if (m < 3) throw Error(ErrorCode::TooFewKnots, "spline needs at least 3 knots, got " + std::to_string(m));
  for (std::size_t i = 1; i < m; ++i) {
    if (!(x_[i] > x_[i - 1])) throw Error(ErrorCode::InvalidArgument, "spline knots must be strictly increasing");
  }

  std::vector<double> h(m - 1), slope(m - 1);
  for (std::size_t i = 0; i + 1 < m; ++i) {
    h[i] = x_[i + 1] - x_[i];
    slope[i] = (y_[i + 1] - y_[i]) / h[i];
  }
  m_.assign(m, 0.0);

  if (boundary == SplineBoundary::not_a_knot && m == 3) {
    // Not-a-knot on three points is the interpolating parabola.
    const double c = (slope[1] - slope[0]) / (x_[2] - x_[0]);
    m_.assign(3, 2.0 * c);
    return;
  }

  // Interior equations for M_1..M_{m-2}:
  //   h_{i-1} M_{i-1} + 2(h_{i-1}+h_i) M_i + h_i M_{i+1} = 6 (slope_i - slope_{i-1})
  const std::size_t k = m - 2;
  std::vector<double> sub(k, 0.0), diag(k), sup(k, 0.0), rhs(k);
  for (std::size_t j = 0; j < k; ++j) {
    const std::size_t i = j + 1;
    sub[j] = h[i - 1];
    diag[j] = 2.0 * (h[i - 1] + h[i]);
    sup[j] = h[i];
    rhs[j] = 6.0 * (slope[i] - slope[i - 1]);
  }
  if (boundary == SplineBoundary::not_a_knot) {
    // Third derivative continuous at x_1 and x_{m-2}; eliminate M_0 and M_{m-1}.
    const double h0 = h[0], h1 = h[1];
    diag[0] = (h0 + h1) * (h0 + 2.0 * h1) / h1;
    sup[0] = (h1 * h1 - h0 * h0) / h1;
    const double ha = h[m - 2], hb = h[m - 3];
    diag[k - 1] = (ha + hb) * (ha + 2.0 * hb) / hb;
    sub[k - 1] = (hb * hb - ha * ha) / hb;
  }
  const auto inner = solve_tridiagonal(std::move(sub), std::move(diag), std::move(sup), std::move(rhs));
  std::copy(inner.begin(), inner.end(), m_.begin() + 1);
  if (boundary == SplineBoundary::not_a_knot) {
    m_[0] = ((h[0] + h[1]) * m_[1] - h[0] * m_[2]) / h[1];
    m_[m - 1] = ((h[m - 2] + h[m - 3]) * m_[m - 2] - h[m - 2] * m_[m - 3]) / h[m - 3];
  }
}

double CubicSpline::operator()(double x) const {
  if (x <= x_.front()) return y_.front();
  if (x >= x_.back()) return y_.back();
  const auto it = std::upper_bound(x_.begin(), x_.end(), x);
  const std::size_t i = static_cast<std::size_t>(it - x_.begin()) - 1;
  const double h = x_[i + 1] - x_[i];
  const double a = (x_[i + 1] - x) / h;
  const double b = (x - x_[i]) / h;
  return a * y_[i] + b * y_[i + 1] + ((a * a * a - a) * m_[i] + (b * b * b - b) * m_[i + 1]) * h * h / 6.0;
}

std::vector<double> spline_impute(const RawSeries& sparse, int first_year, int last_year, SplineBoundary boundary) {
  if (last_year < first_year) throw Error(ErrorCode::InvalidArgument, "empty year range");
  if (sparse.values.size() < 3) {
    throw Error(ErrorCode::TooFewKnots, sparse.country + "/" + sparse.variable + ": " +
                                            std::to_string(sparse.values.size()) + " knots, need at least 3");
  }
  std::vector<double> xs, ys;
  for (const auto& [year, value] : sparse.values) {
    if (!std::isfinite(value)) {
      throw Error(ErrorCode::NonFiniteInput, sparse.country + "/" + sparse.variable + " not finite in " +
                                                 std::to_string(year));
    }
    xs.push_back(year);
    ys.push_back(value);
  }
  const CubicSpline spline(std::move(xs), std::move(ys), boundary);
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(last_year - first_year + 1));
  for (int year = first_year; year <= last_year; ++year) {
    auto it = sparse.values.find(year);
    out.push_back(it != sparse.values.end() ? it->second : spline(year));
  }
  return out;
}

namespace {

const RawSeries& find_series(const std::vector<RawSeries>& raw, const std::string& country, std::string_view var) {
  for (const auto& s : raw) {
    if (s.country == country && s.variable == var) return s;
  }
  throw Error(ErrorCode::MissingSeries, country + ": no '" + std::string(var) + "' series");
}

std::vector<double> yearly(const RawSeries& s, int first_year, int last_year) {
  std::vector<double> out;
  for (int year = first_year; year <= last_year; ++year) {
    auto it = s.values.find(year);
    if (it == s.values.end()) {
      throw Error(ErrorCode::MissingSeries, s.country + ": '" + s.variable + "' missing year " + std::to_string(year));
    }
    if (!std::isfinite(it->second)) {
      throw Error(ErrorCode::NonFiniteInput, s.country + ": '" + s.variable + "' not finite in " + std::to_string(year));
    }
    out.push_back(it->second);
  }
  return out;
}

double checked_log(double v, const std::string& what, int year) {
  if (!(v > 0.0)) {
    throw Error(ErrorCode::NonPositiveForLog, what + " is " + csv::format_double(v) + " in " + std::to_string(year));
  }
  return std::log(v);
}

}  // namespace

CountryVariables build_variables(const std::string& country, const std::vector<RawSeries>& raw, const CpiTable& cpi,
                                 int first_year, int last_year, const PreprocessConfig& cfg) {
  const auto gdp = yearly(find_series(raw, country, raw_vars::gdp_per_worker), first_year, last_year);
  const auto growth = yearly(find_series(raw, country, raw_vars::pop_growth), first_year, last_year);
  const auto inv = yearly(find_series(raw, country, raw_vars::inv_share), first_year, last_year);
  const auto att = yearly(find_series(raw, country, raw_vars::attainment), first_year, last_year);

  CountryVariables out;
  out.country = country;
  out.first_year = first_year;
  std::vector<double> log_gdp, log_inv;
  for (std::size_t t = 0; t < gdp.size(); ++t) {
    const int year = first_year + static_cast<int>(t);
    auto c = cpi.find({country, year});
    if (c == cpi.end()) throw Error(ErrorCode::MissingSeries, country + ": no CPI entry for " + std::to_string(year));
    log_gdp.push_back(checked_log(c->second * gdp[t], country + " CPI-rebased gdp_per_worker", year));
    log_inv.push_back(checked_log(inv[t], country + " inv_share", year));
    out.lnn.push_back(checked_log(cfg.depreciation + growth[t], country + " depreciation rate", year));
    out.lnattain.push_back(checked_log(att[t], country + " attainment", year));
  }
  out.y = hp_trend(log_gdp, cfg.hp);
  out.lnsk = hp_trend(log_inv, cfg.hp);
  return out;
}

std::vector<RawSeries> read_raw_series(std::istream& in, std::string_view source) {
  const auto t = csv::Table::parse(in, source);
  const auto c_country = t.require("country");
  const auto c_var = t.require("variable");
  const auto c_year = t.require("year");
  const auto c_value = t.require("value");
  std::map<std::pair<std::string, std::string>, RawSeries> series;
  for (std::size_t r = 0; r < t.rows(); ++r) {
    if (t.cell(r, c_value).empty()) continue;
    const auto key = std::make_pair(t.cell(r, c_country), t.cell(r, c_var));
    auto& s = series[key];
    s.country = key.first;
    s.variable = key.second;
    const int year = static_cast<int>(t.integer(r, c_year));
    if (!s.values.emplace(year, t.number(r, c_value)).second) {
      throw Error(ErrorCode::DuplicateRow, std::string(source) + " line " + std::to_string(t.line_of(r)) +
                                               ": duplicate " + key.first + "/" + key.second + "/" +
                                               std::to_string(year));
    }
  }
  std::vector<RawSeries> out;
  for (auto& [key, s] : series) out.push_back(std::move(s));
  return out;
}

std::vector<RawSeries> read_raw_series(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return read_raw_series(in, path.string());
}

CpiTable read_cpi(std::istream& in, std::string_view source) {
  const auto t = csv::Table::parse(in, source);
  const auto c_country = t.require("country");
  const auto c_year = t.require("year");
  const auto c_cpi = t.require("cpi");
  CpiTable out;
  for (std::size_t r = 0; r < t.rows(); ++r) {
    const double v = t.number(r, c_cpi);
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw Error(ErrorCode::InvalidValue, std::string(source) + " line " + std::to_string(t.line_of(r)) +
                                               ": CPI must be positive and finite");
    }
    out[{t.cell(r, c_country), static_cast<int>(t.integer(r, c_year))}] = v;
  }
  return out;
}

CpiTable read_cpi(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return read_cpi(in, path.string());
}

}  // namespace vcg
