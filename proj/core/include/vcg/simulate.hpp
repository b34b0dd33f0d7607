#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "vcg/design.hpp"
#include "vcg/estimator.hpp"
#include "vcg/panel_store.hpp"

namespace vcg {

/// Stationary AR(1) around a country-specific mean:
///   mu_i = mean + country_sd * e_i
///   v_t  = clip(mu_i + persistence * (v_{t-1} - mu_i) + innovation_sd * e_t, lower, upper)
struct ArProcess {
  double mean = 0.0;
  double persistence = 0.9;
  double innovation_sd = 0.01;
  double country_sd = 0.0;
  double lower = -1e300;
  double upper = 1e300;
};

/// Complete synthetic data-generating process for the varying-coefficient
/// dynamic panel:
///   y_it      = rho * y_i(t-l) + x_i(t-l)' beta_it + eta_i + nu_it
///   beta_itk  = ztilde_i(t-l)' gamma_k + a_itk,   a_it ~ N(0, Lambda),  nu_it ~ N(0, sigma2)
struct SimSpec {
  std::size_t n = 40;
  std::size_t T = 20;
  int lag = 1;
  int first_year = 1970;
  double rho = 0.93;
  BasisSpec basis;
  Eigen::VectorXd gamma;  // K * B, grouped by regressor
  Eigen::Matrix3d lambda = Eigen::Matrix3d::Zero();
  double sigma2 = 1e-4;
  double eta_scale = 0.1;
  std::array<ArProcess, 3> drivers;     // pov, gini, middleclass
  std::array<ArProcess, 3> regressors;  // lnn, lnsk, lnattain
  int burn_in = 50;
  std::uint64_t seed = 20160101;

  /// Default processes and a default gamma for the default basis.
  SimSpec();

  /// Throws InvalidSpec naming the offending field.
  void validate() const;
};

inline constexpr std::array<const char*, 3> kDriverNames{"pov", "gini", "middleclass"};
inline constexpr std::array<const char*, 3> kRegressorNames{"lnn", "lnsk", "lnattain"};

/// A gamma vector for `basis`: mean returns in the intercept slots and mild
/// quadratic driver effects elsewhere.
[[nodiscard]] Eigen::VectorXd default_gamma(const BasisSpec& basis);

/// Ground truth over the lag-aligned rows (country-major, same order as lag_align).
struct SimTruth {
  double rho = 0.0;
  Eigen::VectorXd eta;
  Eigen::VectorXd gamma;
  Eigen::MatrixXd beta;  // rows x K, realised coefficients
  Eigen::VectorXd u;     // x' a + nu
};

struct SimPanel {
  Panel panel;
  SimTruth truth;
};

/// Draws one panel. Each country has its own random streams derived from
/// (seed, replication, country), so the first m countries of an n-country
/// draw are identical to an m-country draw. The panel's y_poor / y_rich
/// columns are fixed offsets of y.
[[nodiscard]] SimPanel generate_panel(const SimSpec& spec, std::size_t replication = 0);

/// As generate_panel, but covariate paths (x, z and their country means) come
/// from `covariate_replication` while eta, a and nu come from `shock_replication`.
[[nodiscard]] SimPanel generate_panel(const SimSpec& spec, std::size_t covariate_replication,
                                      std::size_t shock_replication);

struct StudyOptions {
  FitConfig fit;
  bool fixed_effects = true;
  /// false: record only the OLS solution (no reweighting, no inference).
  bool iterate = true;
  unsigned threads = 1;
};

/// Estimates recorded per replication over (rho, gamma).
struct ReplicationRecord {
  std::size_t index = 0;
  bool ok = false;
  std::string error;
  bool converged = false;
  int iterations = 0;
  Eigen::VectorXd estimate;      // iterated weighted fit
  Eigen::VectorXd ols_estimate;  // OLS start of the same fit
  Eigen::VectorXd std_errors;
  Eigen::VectorXd p_values;
};

struct CoefficientSummary {
  std::string name;
  double truth = 0.0;
  std::size_t count = 0;
  double mean = 0.0;
  double bias = 0.0;
  double sd = 0.0;
  double mc_se = 0.0;  // sd / sqrt(count), the Monte Carlo standard error of the bias
  double rmse = 0.0;
  double median_abs_error = 0.0;
};

struct SimResult {
  std::vector<std::string> names;  // rho, then gamma labels
  Eigen::VectorXd truth;
  std::vector<ReplicationRecord> replications;
  std::vector<CoefficientSummary> summary;      // iterated fit
  std::vector<CoefficientSummary> ols_summary;  // OLS start
  std::size_t failures = 0;
  std::size_t nonconverged = 0;
};

/// Summary statistics of (estimate - truth) over successful replications.
[[nodiscard]] std::vector<CoefficientSummary> summarize(const std::vector<std::string>& names,
                                                        const Eigen::VectorXd& truth,
                                                        const std::vector<ReplicationRecord>& records, bool use_ols);

/// Generate, fit and record `replications` times. Fit errors are recorded per
/// replication; the study continues.
[[nodiscard]] SimResult recovery_study(const SimSpec& spec, std::size_t replications, const StudyOptions& opts = {});

/// Share of successful replications with p-value below alpha for one
/// coefficient of the (rho, gamma) vector.
[[nodiscard]] double rejection_rate(const SimResult& result, std::size_t coefficient, double alpha = 0.05);

struct CellCheck {
  std::size_t country = 0;
  int year = 0;
  double target = 0.0;     // x' Lambda x + sigma2
  double empirical = 0.0;  // mean of u^2 over replications
  double std_error = 0.0;
  bool within = false;     // |empirical - target| <= 3 * std_error
};

struct PairCheck {
  std::size_t first = 0;  // aligned row indices
  std::size_t second = 0;
  double empirical = 0.0;  // mean of u_a u_b
  double std_error = 0.0;
  bool within = false;
};

struct VarianceReport {
  std::size_t replications = 0;
  std::vector<CellCheck> cells;
  std::vector<PairCheck> pairs;  // same country adjacent years, same year adjacent countries
  double cell_pass_fraction = 0.0;
  double pair_pass_fraction = 0.0;
  double pooled_relative_error = 0.0;  // |mean empirical - mean target| / mean target
  double max_reconstruction_error = 0.0;  // |u from the panel - u drawn|
};

/// Holds covariates fixed, redraws eta, a and nu, recovers u from the
/// generated panel and compares its second moments with x' Lambda x + sigma2
/// (diagonal) and 0 (off-diagonal).
[[nodiscard]] VarianceReport variance_structure_check(const SimSpec& spec, std::size_t replications,
                                                      unsigned threads = 1);

enum class NickellEstimator { ols, iterated };

struct NickellOptions {
  StudyOptions study;
  NickellEstimator estimator = NickellEstimator::ols;
  double benchmark = 3e-4;
};

struct NickellRow {
  double rho = 0.0;
  std::size_t periods = 0;  // T - l
  std::size_t replications = 0;
  double rho_bias = 0.0;
  double rho_mc_se = 0.0;
  std::vector<CoefficientSummary> others;
  double max_abs_other_bias = 0.0;
  bool pass = false;  // every |other bias| < benchmark + 3 mc_se
};

[[nodiscard]] std::vector<NickellRow> nickell_bias_study(const std::vector<double>& rho_grid, const SimSpec& base,
                                                         std::size_t replications, const NickellOptions& opts = {});

void write_replications_csv(std::ostream& out, const SimResult& result);
[[nodiscard]] nlohmann::json recovery_summary(const SimResult& result);
void write_variance_csv(std::ostream& out, const VarianceReport& report);
[[nodiscard]] nlohmann::json variance_summary(const VarianceReport& report);
void write_nickell_csv(std::ostream& out, const std::vector<NickellRow>& rows);
[[nodiscard]] nlohmann::json nickell_summary(const std::vector<NickellRow>& rows, const NickellOptions& opts);

}  // namespace vcg
