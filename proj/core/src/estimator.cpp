#include "vcg/estimator.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include "vcg/error.hpp"

namespace vcg {

namespace {

constexpr double kRankTolerance = 1e-10;

LeastSquaresSolution solve(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Eigen::VectorXd* weights) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr;
  qr.setThreshold(kRankTolerance);
  if (weights) {
    const Eigen::VectorXd s = weights->cwiseSqrt();
    qr.compute(s.asDiagonal() * X);
    LeastSquaresSolution out;
    if (qr.rank() < X.cols()) {
      throw Error(ErrorCode::RankDeficient, "weighted design has rank " + std::to_string(qr.rank()) + " < " +
                                                std::to_string(X.cols()));
    }
    out.theta = qr.solve(s.asDiagonal() * y);
    out.residuals = y - X * out.theta;
    return out;
  }
  qr.compute(X);
  if (qr.rank() < X.cols()) {
    throw Error(ErrorCode::RankDeficient, "design has rank " + std::to_string(qr.rank()) + " < " +
                                              std::to_string(X.cols()));
  }
  LeastSquaresSolution out;
  out.theta = qr.solve(y);
  out.residuals = y - X * out.theta;
  return out;
}

void check_weights(const Eigen::VectorXd& w, Eigen::Index rows) {
  if (w.size() != rows) throw Error(ErrorCode::DimensionMismatch, "weight vector length differs from design rows");
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (!(w(i) > 0.0) || !std::isfinite(w(i))) {
      throw Error(ErrorCode::NonPositiveWeight, "weight " + std::to_string(i) + " is not positive and finite");
    }
  }
}

}  // namespace

void FitConfig::validate() const {
  if (!(convergence_threshold > 0.0)) throw Error(ErrorCode::InvalidConfig, "convergence threshold must be > 0");
  if (max_iterations < 1) throw Error(ErrorCode::InvalidConfig, "max_iterations must be >= 1");
  if (!(weight_floor > 0.0)) throw Error(ErrorCode::InvalidConfig, "weight floor must be > 0");
  if (!(stars.one > stars.two && stars.two > stars.three && stars.three > 0.0 && stars.one < 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "star cutoffs must be strictly decreasing within (0,1)");
  }
}

LeastSquaresSolution ols(const StackedDesign& d) { return solve(d.regressors(), d.y, nullptr); }

LeastSquaresSolution wls(const StackedDesign& d, const Eigen::VectorXd& weights) {
  check_weights(weights, d.y.size());
  return solve(d.regressors(), d.y, &weights);
}

Eigen::VectorXd reciprocal_squared_weights(const Eigen::VectorXd& residuals, double weight_floor) {
  const Eigen::ArrayXd sq = residuals.array().square();
  const double mean_sq = sq.mean();
  if (!(mean_sq > 0.0)) return Eigen::VectorXd::Ones(residuals.size());
  const double floor = weight_floor * mean_sq;
  Eigen::VectorXd w = sq.max(floor).inverse().matrix();
  return w / w.mean();
}

double normal_p_value(double estimate, double std_error) {
  if (std::isnan(estimate) || std::isnan(std_error)) return std::numeric_limits<double>::quiet_NaN();
  if (estimate == 0.0) return 1.0;
  if (std_error == 0.0) return 0.0;
  return std::erfc(std::abs(estimate / std_error) / std::sqrt(2.0));
}

int stars_for(double p, const StarThresholds& t) {
  if (std::isnan(p)) return 0;
  if (p < t.three) return 3;
  if (p < t.two) return 2;
  if (p < t.one) return 1;
  return 0;
}

std::string format_estimate(double estimate, int stars, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, estimate);
  return std::string(buf) + std::string(static_cast<std::size_t>(std::max(stars, 0)), '*');
}

Inference inference(const StackedDesign& d, const Eigen::VectorXd& theta, const Eigen::VectorXd& weights,
                    const Eigen::VectorXd& residuals, const FitConfig& cfg) {
  const Eigen::MatrixXd X = d.regressors();
  const Eigen::Index N = X.rows();
  const Eigen::Index p = X.cols();
  if (theta.size() != p || residuals.size() != N) {
    throw Error(ErrorCode::DimensionMismatch, "inference inputs do not match the design");
  }
  check_weights(weights, N);
  if (!(residuals.norm() > 1e-10 * std::max(d.y.norm(), 1.0))) {
    throw Error(ErrorCode::SingularMeat, "residuals vanish; covariance cannot be estimated");
  }

  // (X'WX)^{-1} from the QR factors of W^{1/2} X.
  const Eigen::VectorXd s = weights.cwiseSqrt();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(s.asDiagonal() * X);
  qr.setThreshold(kRankTolerance);
  if (qr.rank() < p) throw Error(ErrorCode::RankDeficient, "weighted design is rank deficient");
  const Eigen::MatrixXd R = qr.matrixR().topLeftCorner(p, p).triangularView<Eigen::Upper>();
  const Eigen::MatrixXd Rinv =
      R.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(p, p));
  const Eigen::MatrixXd bread_inv =
      qr.colsPermutation() * (Rinv * Rinv.transpose()) * qr.colsPermutation().transpose();

  Inference out;
  if (cfg.covariance == CovarianceKind::sandwich) {
    // V = B^{-1} X' diag(w^2 e^2) X B^{-1} = A A' with A = B^{-1} X' diag(w e).
    const Eigen::VectorXd we = weights.cwiseProduct(residuals);
    const Eigen::MatrixXd A = bread_inv * (X.transpose() * we.asDiagonal());
    out.covariance = A * A.transpose();
  } else {
    const double dof = static_cast<double>(std::max<Eigen::Index>(N - p, 1));
    const double sigma2 = weights.dot(residuals.cwiseAbs2()) / dof;
    out.covariance = sigma2 * bread_inv;
  }
  out.covariance = 0.5 * (out.covariance + out.covariance.transpose()).eval();

  out.std_errors = out.covariance.diagonal().cwiseMax(0.0).cwiseSqrt();
  out.p_values.resize(p);
  out.stars.resize(static_cast<std::size_t>(p));
  for (Eigen::Index j = 0; j < p; ++j) {
    out.p_values(j) = normal_p_value(theta(j), out.std_errors(j));
    out.stars[static_cast<std::size_t>(j)] = stars_for(out.p_values(j), cfg.stars);
  }
  return out;
}

Eigen::VectorXd FitResult::gamma_k(std::size_t k) const {
  return gamma.segment(static_cast<Eigen::Index>(k * B), static_cast<Eigen::Index>(B));
}

Eigen::MatrixXd FitResult::gamma_covariance(std::size_t k) const {
  const auto off = static_cast<Eigen::Index>(gamma_offset() + k * B);
  const auto b = static_cast<Eigen::Index>(B);
  return covariance.block(off, off, b, b);
}

FitResult fit_iterated(const StackedDesign& d, const FitConfig& cfg) {
  cfg.validate();
  const Eigen::MatrixXd X = d.regressors();

  FitResult fit;
  fit.config = cfg;
  fit.n = d.n();
  fit.K = d.K;
  fit.B = d.B;

  // (1) OLS start.
  LeastSquaresSolution current = solve(X, d.y, nullptr);
  fit.ols_theta = current.theta;
  Eigen::VectorXd weights = Eigen::VectorXd::Ones(X.rows());

  for (int iter = 1; iter <= cfg.max_iterations; ++iter) {
    // (2) residuals -> weights, (3) weighted refit.
    weights = reciprocal_squared_weights(current.residuals, cfg.weight_floor);
    LeastSquaresSolution next = solve(X, d.y, &weights);
    const double change = (next.theta - current.theta).squaredNorm();
    current = std::move(next);
    fit.trace.push_back(change);
    fit.iterations = iter;
    if (change < cfg.convergence_threshold) {
      fit.converged = true;
      fit.stop_reason = "converged";
      break;
    }
    const std::size_t k = fit.trace.size();
    if (k >= 3 && fit.trace[k - 1] > fit.trace[k - 2] && fit.trace[k - 2] > fit.trace[k - 3]) {
      fit.stop_reason = "oscillation";
      break;
    }
  }
  if (!fit.converged && fit.stop_reason.empty()) fit.stop_reason = "max_iterations";

  fit.theta = current.theta;
  fit.residuals = current.residuals;
  fit.final_weights = weights;
  fit.rho = fit.theta(0);
  fit.eta = fit.theta.segment(1, static_cast<Eigen::Index>(fit.n));
  fit.gamma = fit.theta.tail(static_cast<Eigen::Index>(fit.M()));

  const auto p = fit.theta.size();
  try {
    auto inf = inference(d, fit.theta, weights, fit.residuals, cfg);
    fit.covariance = std::move(inf.covariance);
    fit.std_errors = std::move(inf.std_errors);
    fit.p_values = std::move(inf.p_values);
    fit.stars = std::move(inf.stars);
    fit.inference_available = true;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::SingularMeat) throw;
    fit.covariance = Eigen::MatrixXd::Zero(p, p);
    fit.std_errors = Eigen::VectorXd::Zero(p);
    fit.p_values = Eigen::VectorXd::Constant(p, std::numeric_limits<double>::quiet_NaN());
    fit.stars.assign(static_cast<std::size_t>(p), 0);
    fit.inference_note = e.what();
  }
  return fit;
}

namespace {

nlohmann::json number_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

nlohmann::json coefficient_entry(const FitResult& fit, std::size_t j) {
  const auto jj = static_cast<Eigen::Index>(j);
  nlohmann::json e;
  e["estimate"] = fit.theta(jj);
  e["std_error"] = fit.inference_available ? number_or_null(fit.std_errors(jj)) : nlohmann::json(nullptr);
  e["p_value"] = number_or_null(fit.p_values(jj));
  e["stars"] = fit.stars[j];
  e["display"] = format_estimate(fit.theta(jj), fit.stars[j]);
  return e;
}

const char* covariance_name(CovarianceKind k) { return k == CovarianceKind::sandwich ? "sandwich" : "naive"; }

}  // namespace

nlohmann::json fit_to_json(const FitResult& fit, const StackedDesign& d) {
  nlohmann::json doc;
  doc["format"] = "vcgrowth.fit/1";
  doc["dimensions"] = {{"rows", d.rows()}, {"n", fit.n},  {"K", fit.K},
                       {"B", fit.B},       {"M", fit.M()}, {"coefficients", fit.theta.size()}};
  doc["rho"] = coefficient_entry(fit, 0);

  nlohmann::json eta = nlohmann::json::array();
  for (std::size_t i = 0; i < fit.n; ++i) {
    auto e = coefficient_entry(fit, 1 + i);
    e["country"] = d.countries[i];
    eta.push_back(std::move(e));
  }
  doc["eta"] = std::move(eta);

  nlohmann::json gamma = nlohmann::json::array();
  for (std::size_t g = 0; g < fit.M(); ++g) {
    auto e = coefficient_entry(fit, fit.gamma_offset() + g);
    e["index"] = g;
    e["regressor"] = d.regressor_names[g / fit.B];
    e["basis"] = d.basis_labels[g % fit.B];
    gamma.push_back(std::move(e));
  }
  doc["gamma"] = std::move(gamma);

  doc["iterations"] = fit.iterations;
  doc["converged"] = fit.converged;
  doc["stop_reason"] = fit.stop_reason;
  doc["trace"] = fit.trace;
  doc["final_mean_squared_change"] =
      fit.trace.empty() ? nlohmann::json(nullptr) : nlohmann::json(fit.trace.back() / static_cast<double>(fit.theta.size()));
  doc["inference"] = {{"available", fit.inference_available},
                      {"covariance", covariance_name(fit.config.covariance)},
                      {"reference", "normal"},
                      {"note", fit.inference_note}};
  doc["config"] = {{"convergence_threshold", fit.config.convergence_threshold},
                   {"max_iterations", fit.config.max_iterations},
                   {"weight_floor", fit.config.weight_floor},
                   {"star_thresholds", {fit.config.stars.one, fit.config.stars.two, fit.config.stars.three}},
                   {"covariance", covariance_name(fit.config.covariance)}};
  return doc;
}

}  // namespace vcg
