#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vcg/panel_store.hpp"

namespace vcg {

/// Polynomial basis in the distributional drivers. With the defaults the
/// basis is (1, pov, pov^2, gini, gini^2, middleclass, middleclass^2).
struct BasisSpec {
  std::vector<std::string> drivers{"pov", "gini", "middleclass"};
  int degree = 2;
  bool include_intercept = true;

  /// B = [intercept] + degree * #drivers.
  [[nodiscard]] std::size_t dimension() const noexcept;
  /// Human-readable element names, e.g. "1", "pov", "pov^2".
  [[nodiscard]] std::vector<std::string> labels() const;
  /// Throws InvalidConfig for a negative degree or an empty basis.
  void validate() const;
};

/// Evaluates the basis at driver values given in spec.drivers order.
/// Throws DimensionMismatch or NonFiniteDriver.
[[nodiscard]] Eigen::VectorXd basis_eval(std::span<const double> z, const BasisSpec& spec);

struct RowKey {
  std::size_t country = 0;
  int year = 0;
};

/// The stacked system y = rho * y_lag + C eta + W gamma + u.
/// Coefficients are ordered theta = (rho, eta_1..eta_n, gamma_1..gamma_M), with
/// gamma grouped by regressor: gamma index k*B + b multiplies x_k * ztilde_b.
struct StackedDesign {
  Eigen::VectorXd y;
  Eigen::VectorXd y_lag;
  Eigen::MatrixXd C;  // rows x n fixed-effect dummies (rows x 0 without fixed effects)
  Eigen::MatrixXd W;  // rows x M
  std::vector<RowKey> row_index;
  std::vector<std::string> countries;
  std::vector<std::string> regressor_names;
  std::vector<std::string> basis_labels;
  BasisSpec basis;
  std::size_t K = 0;
  std::size_t B = 0;
  bool fixed_effects = true;

  [[nodiscard]] std::size_t rows() const noexcept { return static_cast<std::size_t>(y.size()); }
  [[nodiscard]] std::size_t n() const noexcept { return static_cast<std::size_t>(C.cols()); }
  [[nodiscard]] std::size_t M() const noexcept { return K * B; }
  [[nodiscard]] std::size_t coefficients() const noexcept { return 1 + n() + M(); }
  [[nodiscard]] std::size_t gamma_offset() const noexcept { return 1 + n(); }
  /// [y_lag | C | W].
  [[nodiscard]] Eigen::MatrixXd regressors() const;
  /// Name of coefficient j, e.g. "rho", "eta[C001]", "lnsk:gini^2".
  [[nodiscard]] std::string coefficient_name(std::size_t j) const;
};

/// Throws DimensionMismatch (empty sample) or UnknownDriver.
[[nodiscard]] StackedDesign build_stacked(const AlignedPanel& aligned, const BasisSpec& spec = {},
                                          bool fixed_effects = true);

struct IdentificationReport {
  std::size_t rows = 0;
  std::size_t columns = 0;
  std::size_t rank = 0;
  std::size_t deficiency = 0;  // columns - rank
  double largest_singular_value = 0.0;
  double smallest_singular_value = 0.0;
  double tolerance = 1e-10;  // relative to the largest singular value
  bool pass = false;
};

/// Effective rank of [y_lag | C | W] from its singular values. Never throws.
[[nodiscard]] IdentificationReport check_identification(const StackedDesign& d, double relative_tolerance = 1e-10);

/// Dense dump: country, year, y, y_lag, C columns, W columns.
void write_design_csv(std::ostream& out, const StackedDesign& d);

}  // namespace vcg
