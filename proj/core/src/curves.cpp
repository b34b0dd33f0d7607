#include "vcg/curves.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <boost/math/distributions/normal.hpp>

#include "vcg/csv.hpp"
#include "vcg/error.hpp"

namespace vcg {

namespace {

Eigen::Index driver_column(const AlignedPanel& aligned, const std::string& name) {
  auto it = std::find(aligned.driver_names.begin(), aligned.driver_names.end(), name);
  if (it == aligned.driver_names.end()) throw Error(ErrorCode::UnknownDriver, "no driver named '" + name + "'");
  return static_cast<Eigen::Index>(it - aligned.driver_names.begin());
}

std::vector<double> basis_row(const AlignedPanel& aligned, const BasisSpec& spec, Eigen::Index r) {
  std::vector<double> z;
  for (const auto& name : spec.drivers) z.push_back(aligned.z(r, driver_column(aligned, name)));
  return z;
}

}  // namespace

CoefficientCurve eval_curve(const FitResult& fit, const StackedDesign& d, std::size_t k, const std::string& driver,
                            const AlignedPanel& aligned, const CurveConfig& cfg) {
  if (!fit.converged && !cfg.allow_nonconverged) {
    throw Error(ErrorCode::NotConvergedFit, "fit did not converge (" + fit.stop_reason + ")");
  }
  if (k >= fit.K) throw Error(ErrorCode::InvalidArgument, "regressor index out of range");
  if (cfg.points < 2) throw Error(ErrorCode::InvalidConfig, "a curve needs at least 2 grid points");
  if (!(cfg.level > 0.0 && cfg.level < 1.0)) throw Error(ErrorCode::InvalidConfig, "band level must lie in (0,1)");
  const auto& drivers = d.basis.drivers;
  const auto pos = std::find(drivers.begin(), drivers.end(), driver);
  if (pos == drivers.end()) throw Error(ErrorCode::UnknownDriver, "'" + driver + "' is not a basis driver");
  const auto varying = static_cast<std::size_t>(pos - drivers.begin());

  std::vector<double> held(drivers.size());
  for (std::size_t j = 0; j < drivers.size(); ++j) held[j] = aligned.z.col(driver_column(aligned, drivers[j])).mean();
  const Eigen::VectorXd column = aligned.z.col(driver_column(aligned, driver));
  const double lo = column.minCoeff();
  const double hi = column.maxCoeff();
  if (!(hi > lo)) throw Error(ErrorCode::InvalidArgument, "driver '" + driver + "' does not vary in the sample");

  const boost::math::normal_distribution<double> normal;
  const double zcrit = boost::math::quantile(normal, 0.5 + cfg.level / 2.0);
  const Eigen::VectorXd gk = fit.gamma_k(k);
  const Eigen::MatrixXd Vk = fit.gamma_covariance(k);

  CoefficientCurve curve;
  curve.k = k;
  curve.regressor = d.regressor_names[k];
  curve.driver = driver;
  curve.level = cfg.level;
  for (std::size_t g = 0; g < cfg.points; ++g) {
    const double value =
        g + 1 == cfg.points ? hi : lo + (hi - lo) * static_cast<double>(g) / static_cast<double>(cfg.points - 1);
    held[varying] = value;
    const Eigen::VectorXd zt = basis_eval(held, d.basis);
    const double var = zt.dot(Vk * zt);
    curve.grid.push_back(value);
    curve.beta.push_back(zt.dot(gk));
    curve.half_width.push_back(zcrit * std::sqrt(std::max(var, 0.0)));
    curve.max_band_width = std::max(curve.max_band_width, 2.0 * curve.half_width.back());
  }
  return curve;
}

ObservationBetas observation_betas(const FitResult& fit, const StackedDesign& d, const AlignedPanel& aligned) {
  ObservationBetas out;
  out.countries = aligned.countries;
  out.regressor_names = d.regressor_names;
  const auto rows = static_cast<Eigen::Index>(aligned.rows());
  out.beta.resize(rows, static_cast<Eigen::Index>(fit.K));
  out.rows.reserve(aligned.rows());
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Eigen::VectorXd zt = basis_eval(basis_row(aligned, d.basis, r), d.basis);
    for (std::size_t k = 0; k < fit.K; ++k) out.beta(r, static_cast<Eigen::Index>(k)) = zt.dot(fit.gamma_k(k));
    out.rows.push_back({aligned.country_index[static_cast<std::size_t>(r)], aligned.year[static_cast<std::size_t>(r)]});
  }
  return out;
}

double sample_quantile(std::span<const double> sorted, double p) {
  const std::size_t m = sorted.size();
  if (m == 0) throw Error(ErrorCode::InvalidArgument, "quantile of an empty sample");
  // Position h (1-based) satisfies p = (h - 0.5) / m.
  const double h = static_cast<double>(m) * p + 0.5;
  if (h <= 1.0) return sorted.front();
  if (h >= static_cast<double>(m)) return sorted.back();
  const auto j = static_cast<std::size_t>(std::floor(h));
  const double frac = h - static_cast<double>(j);
  return sorted[j - 1] + frac * (sorted[j] - sorted[j - 1]);
}

FiveNumber five_number(std::vector<double> sample) {
  std::sort(sample.begin(), sample.end());
  return {sample_quantile(sample, 0.0), sample_quantile(sample, 0.25), sample_quantile(sample, 0.5),
          sample_quantile(sample, 0.75), sample_quantile(sample, 1.0)};
}

std::vector<GroupStats> group_boxstats(const ObservationBetas& betas,
                                       const std::map<std::string, std::string>& grouping) {
  std::map<std::string, std::vector<Eigen::Index>> members;
  for (std::size_t r = 0; r < betas.rows.size(); ++r) {
    const std::string& country = betas.countries[betas.rows[r].country];
    auto it = grouping.find(country);
    if (it == grouping.end()) throw Error(ErrorCode::UnmappedCountry, "no group for country " + country);
    members[it->second].push_back(static_cast<Eigen::Index>(r));
  }
  std::vector<GroupStats> out;
  for (const auto& [group, rows] : members) {
    for (Eigen::Index k = 0; k < betas.beta.cols(); ++k) {
      std::vector<double> sample;
      sample.reserve(rows.size());
      for (auto r : rows) sample.push_back(betas.beta(r, k));
      GroupStats s;
      s.group = group;
      s.k = static_cast<std::size_t>(k);
      s.regressor = betas.regressor_names[s.k];
      s.count = sample.size();
      s.summary = five_number(std::move(sample));
      out.push_back(std::move(s));
    }
  }
  return out;
}

void write_curve_csv(std::ostream& out, const CoefficientCurve& curve) {
  csv::write_row(out, {"grid", "beta", "lo", "hi"});
  for (std::size_t g = 0; g < curve.grid.size(); ++g) {
    csv::write_row(out, {csv::format_double(curve.grid[g]), csv::format_double(curve.beta[g]),
                         csv::format_double(curve.beta[g] - curve.half_width[g]),
                         csv::format_double(curve.beta[g] + curve.half_width[g])});
  }
}

void write_boxstats_csv(std::ostream& out, const std::vector<GroupStats>& stats) {
  csv::write_row(out, {"group", "regressor", "count", "min", "q1", "median", "q3", "max"});
  for (const auto& s : stats) {
    csv::write_row(out, {s.group, s.regressor, std::to_string(s.count), csv::format_double(s.summary.min),
                         csv::format_double(s.summary.q1), csv::format_double(s.summary.median),
                         csv::format_double(s.summary.q3), csv::format_double(s.summary.max)});
  }
}

nlohmann::json curves_summary(const std::vector<CoefficientCurve>& curves, const std::vector<GroupStats>& stats) {
  nlohmann::json doc;
  doc["format"] = "vcgrowth.curves/1";
  doc["band"] = {{"kind", "pointwise normal"},
                 {"level", curves.empty() ? 0.95 : curves.front().level},
                 {"held_driver_means", "pooled over all aligned observations, treated as fixed"},
                 {"max_band_width", "maximum over the grid of hi - lo"}};
  nlohmann::json cs = nlohmann::json::array();
  for (const auto& c : curves) {
    cs.push_back({{"regressor", c.regressor},
                  {"driver", c.driver},
                  {"points", c.grid.size()},
                  {"grid_min", c.grid.front()},
                  {"grid_max", c.grid.back()},
                  {"max_band_width", c.max_band_width}});
  }
  doc["curves"] = std::move(cs);
  nlohmann::json bs = nlohmann::json::array();
  for (const auto& s : stats) {
    bs.push_back({{"group", s.group},
                  {"regressor", s.regressor},
                  {"count", s.count},
                  {"min", s.summary.min},
                  {"q1", s.summary.q1},
                  {"median", s.summary.median},
                  {"q3", s.summary.q3},
                  {"max", s.summary.max}});
  }
  doc["groups"] = std::move(bs);
  return doc;
}

}  // namespace vcg
