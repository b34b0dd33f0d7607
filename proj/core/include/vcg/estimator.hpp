#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "vcg/design.hpp"

namespace vcg {

enum class CovarianceKind {
  sandwich,  // heteroscedasticity-consistent, around the final weighted solution
  naive,     // sigma^2 (X'WX)^{-1}, treating the weights as known
};

/// p-value cutoffs for one, two and three stars. "Almost zero" is read as p < 1e-4.
struct StarThresholds {
  double one = 0.05;
  double two = 0.01;
  double three = 1e-4;
};

struct FitConfig {
  /// Stop once the sum of squared changes of (rho, eta, gamma) between
  /// successive weighted fits drops below this.
  double convergence_threshold = 0.005;
  int max_iterations = 100;
  /// Squared residuals are floored at weight_floor * mean(squared residuals)
  /// before taking reciprocals.
  double weight_floor = 1e-6;
  StarThresholds stars;
  CovarianceKind covariance = CovarianceKind::sandwich;

  /// Throws InvalidConfig.
  void validate() const;
};

struct LeastSquaresSolution {
  Eigen::VectorXd theta;
  Eigen::VectorXd residuals;  // y - X theta, unweighted
};

/// Minimizes ||y - rho y_lag - C eta - W gamma||^2 by column-pivoted
/// Householder QR. Throws RankDeficient.
[[nodiscard]] LeastSquaresSolution ols(const StackedDesign& d);

/// Minimizes sum w_i (y_i - x_i' theta)^2 (OLS on rows scaled by sqrt(w)).
/// Throws NonPositiveWeight, DimensionMismatch or RankDeficient.
[[nodiscard]] LeastSquaresSolution wls(const StackedDesign& d, const Eigen::VectorXd& weights);

/// Reciprocal squared residuals with the relative floor, rescaled to mean 1
/// (the weighted argmin is invariant to a common scale). A perfect fit
/// (all residuals zero) yields unit weights.
[[nodiscard]] Eigen::VectorXd reciprocal_squared_weights(const Eigen::VectorXd& residuals, double weight_floor);

struct Inference {
  Eigen::MatrixXd covariance;
  Eigen::VectorXd std_errors;
  Eigen::VectorXd p_values;  // two-sided, normal reference
  std::vector<int> stars;
};

/// Coefficient covariance, p-values and stars at a weighted solution.
/// Throws SingularMeat when the residuals vanish (nothing to estimate from).
[[nodiscard]] Inference inference(const StackedDesign& d, const Eigen::VectorXd& theta, const Eigen::VectorXd& weights,
                                  const Eigen::VectorXd& residuals, const FitConfig& cfg = {});

/// Two-sided normal p-value for an estimate and its standard error.
[[nodiscard]] double normal_p_value(double estimate, double std_error);
[[nodiscard]] int stars_for(double p_value, const StarThresholds& t = {});
/// "0.9318***" style rendering.
[[nodiscard]] std::string format_estimate(double estimate, int stars, int decimals = 4);

struct FitResult {
  double rho = 0.0;
  Eigen::VectorXd eta;
  Eigen::VectorXd gamma;
  Eigen::VectorXd theta;      // (rho, eta, gamma)
  Eigen::VectorXd ols_theta;  // the unweighted starting solution
  Eigen::MatrixXd covariance;
  Eigen::VectorXd std_errors;
  Eigen::VectorXd p_values;
  std::vector<int> stars;
  bool inference_available = false;
  std::string inference_note;
  Eigen::VectorXd residuals;
  Eigen::VectorXd final_weights;
  int iterations = 0;
  bool converged = false;
  std::string stop_reason;  // "converged", "max_iterations" or "oscillation"
  std::vector<double> trace;  // sum of squared coefficient changes per iteration
  FitConfig config;
  std::size_t n = 0;
  std::size_t K = 0;
  std::size_t B = 0;

  [[nodiscard]] std::size_t M() const noexcept { return K * B; }
  [[nodiscard]] std::size_t gamma_offset() const noexcept { return 1 + n; }
  /// gamma_k (length B) and its covariance block.
  [[nodiscard]] Eigen::VectorXd gamma_k(std::size_t k) const;
  [[nodiscard]] Eigen::MatrixXd gamma_covariance(std::size_t k) const;
};

/// OLS start, then repeated weighted least squares with reciprocal squared
/// residuals of the previous fit as weights, until the squared coefficient
/// change falls below the threshold. Non-convergence (iteration cap, or the
/// change growing on two consecutive iterations) is reported through
/// `converged`/`stop_reason`, not thrown. Throws RankDeficient.
[[nodiscard]] FitResult fit_iterated(const StackedDesign& d, const FitConfig& cfg = {});

/// Structured fit document. Keys are stable; see README.
[[nodiscard]] nlohmann::json fit_to_json(const FitResult& fit, const StackedDesign& d);

}  // namespace vcg
