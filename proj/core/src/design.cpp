#include "vcg/design.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "vcg/csv.hpp"
#include "vcg/error.hpp"

namespace vcg {

std::size_t BasisSpec::dimension() const noexcept {
  return (include_intercept ? 1u : 0u) + static_cast<std::size_t>(std::max(degree, 0)) * drivers.size();
}

std::vector<std::string> BasisSpec::labels() const {
  std::vector<std::string> out;
  if (include_intercept) out.emplace_back("1");
  for (const auto& d : drivers) {
    for (int p = 1; p <= degree; ++p) out.push_back(p == 1 ? d : d + "^" + std::to_string(p));
  }
  return out;
}

void BasisSpec::validate() const {
  if (degree < 0) throw Error(ErrorCode::InvalidConfig, "basis degree must be >= 0");
  if (dimension() == 0) throw Error(ErrorCode::InvalidConfig, "basis is empty");
}

Eigen::VectorXd basis_eval(std::span<const double> z, const BasisSpec& spec) {
  spec.validate();
  if (z.size() != spec.drivers.size()) {
    throw Error(ErrorCode::DimensionMismatch, "basis expects " + std::to_string(spec.drivers.size()) +
                                                  " driver values, got " + std::to_string(z.size()));
  }
  Eigen::VectorXd out(static_cast<Eigen::Index>(spec.dimension()));
  Eigen::Index b = 0;
  if (spec.include_intercept) out(b++) = 1.0;
  for (std::size_t d = 0; d < z.size(); ++d) {
    if (!std::isfinite(z[d])) throw Error(ErrorCode::NonFiniteDriver, "driver '" + spec.drivers[d] + "' is not finite");
    double power = 1.0;
    for (int p = 1; p <= spec.degree; ++p) {
      power *= z[d];
      out(b++) = power;
    }
  }
  return out;
}

Eigen::MatrixXd StackedDesign::regressors() const {
  Eigen::MatrixXd X(y.size(), static_cast<Eigen::Index>(coefficients()));
  X.col(0) = y_lag;
  if (C.cols()) X.middleCols(1, C.cols()) = C;
  X.rightCols(W.cols()) = W;
  return X;
}

std::string StackedDesign::coefficient_name(std::size_t j) const {
  if (j == 0) return "rho";
  if (j < gamma_offset()) return "eta[" + countries[j - 1] + "]";
  const std::size_t g = j - gamma_offset();
  return regressor_names[g / B] + ":" + basis_labels[g % B];
}

StackedDesign build_stacked(const AlignedPanel& aligned, const BasisSpec& spec, bool fixed_effects) {
  spec.validate();
  if (aligned.rows() == 0) throw Error(ErrorCode::DimensionMismatch, "aligned panel has no rows");
  if (aligned.x.rows() != aligned.y.size() || aligned.z.rows() != aligned.y.size() ||
      aligned.y_lag.size() != aligned.y.size() || aligned.country_index.size() != aligned.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "aligned panel columns differ in length");
  }

  std::vector<Eigen::Index> driver_cols;
  for (const auto& name : spec.drivers) {
    auto it = std::find(aligned.driver_names.begin(), aligned.driver_names.end(), name);
    if (it == aligned.driver_names.end()) throw Error(ErrorCode::UnknownDriver, "no driver named '" + name + "'");
    driver_cols.push_back(static_cast<Eigen::Index>(it - aligned.driver_names.begin()));
  }

  StackedDesign d;
  d.basis = spec;
  d.K = static_cast<std::size_t>(aligned.x.cols());
  d.B = spec.dimension();
  d.fixed_effects = fixed_effects;
  d.countries = aligned.countries;
  d.regressor_names = aligned.regressor_names;
  d.basis_labels = spec.labels();
  d.y = aligned.y;
  d.y_lag = aligned.y_lag;

  const auto rows = static_cast<Eigen::Index>(aligned.rows());
  const auto n = fixed_effects ? static_cast<Eigen::Index>(aligned.n) : 0;
  d.C = Eigen::MatrixXd::Zero(rows, n);
  d.W.resize(rows, static_cast<Eigen::Index>(d.M()));
  d.row_index.reserve(aligned.rows());

  std::vector<double> z(driver_cols.size());
  const auto B = static_cast<Eigen::Index>(d.B);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const std::size_t i = aligned.country_index[static_cast<std::size_t>(r)];
    if (fixed_effects) d.C(r, static_cast<Eigen::Index>(i)) = 1.0;
    for (std::size_t k = 0; k < driver_cols.size(); ++k) z[k] = aligned.z(r, driver_cols[k]);
    const Eigen::VectorXd zt = basis_eval(z, spec);
    for (Eigen::Index k = 0; k < aligned.x.cols(); ++k) d.W.row(r).segment(k * B, B) = aligned.x(r, k) * zt.transpose();
    d.row_index.push_back({i, aligned.year[static_cast<std::size_t>(r)]});
  }
  return d;
}

IdentificationReport check_identification(const StackedDesign& d, double relative_tolerance) {
  IdentificationReport rep;
  rep.rows = d.rows();
  rep.columns = d.coefficients();
  rep.tolerance = relative_tolerance;
  const Eigen::MatrixXd X = d.regressors();
  if (X.rows() == 0 || X.cols() == 0) {
    rep.deficiency = rep.columns;
    return rep;
  }
  Eigen::BDCSVD<Eigen::MatrixXd> svd(X);
  const Eigen::VectorXd& sv = svd.singularValues();
  rep.largest_singular_value = sv.size() ? sv(0) : 0.0;
  rep.smallest_singular_value = sv.size() ? sv(sv.size() - 1) : 0.0;
  const double cutoff = relative_tolerance * rep.largest_singular_value;
  for (Eigen::Index j = 0; j < sv.size(); ++j) {
    if (sv(j) > cutoff) ++rep.rank;
  }
  rep.deficiency = rep.columns - rep.rank;
  rep.pass = rep.rank == rep.columns && rep.largest_singular_value > 0.0;
  return rep;
}

void write_design_csv(std::ostream& out, const StackedDesign& d) {
  std::vector<std::string> header{"country", "year", "y", "y_lag"};
  for (std::size_t i = 0; i < d.n(); ++i) header.push_back("C[" + d.countries[i] + "]");
  for (std::size_t g = 0; g < d.M(); ++g) header.push_back("W[" + d.coefficient_name(d.gamma_offset() + g) + "]");
  csv::write_row(out, header);
  for (std::size_t r = 0; r < d.rows(); ++r) {
    const auto ri = static_cast<Eigen::Index>(r);
    std::vector<std::string> row{d.countries[d.row_index[r].country], std::to_string(d.row_index[r].year),
                                 csv::format_double(d.y(ri)), csv::format_double(d.y_lag(ri))};
    for (Eigen::Index c = 0; c < d.C.cols(); ++c) row.push_back(csv::format_double(d.C(ri, c)));
    for (Eigen::Index c = 0; c < d.W.cols(); ++c) row.push_back(csv::format_double(d.W(ri, c)));
    csv::write_row(out, row);
  }
}

}  // namespace vcg
