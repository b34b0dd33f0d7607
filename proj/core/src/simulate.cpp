#include "vcg/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <ostream>
#include <random>
#include <thread>

#include <Eigen/Eigenvalues>

#include "vcg/csv.hpp"
#include "vcg/error.hpp"

namespace vcg {
namespace {

enum Purpose : std::uint32_t { kCovariates = 1, kShocks = 2 };

std::mt19937_64 stream(std::uint64_t seed, std::size_t replication, std::size_t country, Purpose purpose) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(replication), static_cast<std::uint32_t>(country),
                    static_cast<std::uint32_t>(purpose)};
  return std::mt19937_64(seq);
}

void invalid(const std::string& field, const std::string& why) {
  throw Error(ErrorCode::InvalidSpec, field + ": " + why);
}

void check_process(const std::string& name, const ArProcess& p, double legal_lo, double legal_hi, bool open_hi) {
  for (double v : {p.mean, p.persistence, p.innovation_sd, p.country_sd, p.lower, p.upper}) {
    if (!std::isfinite(v)) invalid(name, "non-finite parameter");
  }
  if (std::abs(p.persistence) >= 1.0) invalid(name + ".persistence", "must satisfy |phi| < 1");
  if (p.innovation_sd < 0.0) invalid(name + ".innovation_sd", "negative");
  if (p.country_sd < 0.0) invalid(name + ".country_sd", "negative");
  if (!(p.lower < p.upper)) invalid(name, "lower must be below upper");
  if (p.mean < p.lower || p.mean > p.upper) invalid(name + ".mean", "outside [lower, upper]");
  if (p.lower < legal_lo || p.upper > legal_hi || (open_hi && p.upper >= legal_hi)) {
    invalid(name, "clip range exceeds the variable's legal range");
  }
}

// Symmetric square root of a PSD matrix.
Eigen::Matrix3d sqrt_psd(const Eigen::Matrix3d& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(m);
  Eigen::Vector3d ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

std::string country_name(std::size_t i, std::size_t n) {
  const int width = std::max(3, static_cast<int>(std::to_string(n).size()));
  char buf[32];
  std::snprintf(buf, sizeof buf, "C%0*zu", width, i + 1);
  return buf;
}

double clip(double v, const ArProcess& p) { return std::clamp(v, p.lower, p.upper); }

struct CountryPaths {
  std::vector<std::array<double, 3>> z;
  std::vector<std::array<double, 3>> x;
  std::array<double, 3> z_mean{};
  std::array<double, 3> x_mean{};
};

CountryPaths draw_covariates(const SimSpec& spec, std::size_t rep, std::size_t i, std::size_t periods) {
  auto rng = stream(spec.seed, rep, i, kCovariates);
  std::normal_distribution<double> N(0.0, 1.0);
  CountryPaths c;
  c.z.resize(periods);
  c.x.resize(periods);
  auto run = [&](const std::array<ArProcess, 3>& procs, std::array<double, 3>& mean,
                 std::vector<std::array<double, 3>>& path) {
    std::array<double, 3> state{};
    for (std::size_t d = 0; d < 3; ++d) {
      const auto& p = procs[d];
      mean[d] = clip(p.mean + p.country_sd * N(rng), p);
      const double stationary_sd = p.innovation_sd / std::sqrt(1.0 - p.persistence * p.persistence);
      state[d] = clip(mean[d] + stationary_sd * N(rng), p);
    }
    for (std::size_t s = 0; s < periods; ++s) {
      for (std::size_t d = 0; d < 3; ++d) {
        const auto& p = procs[d];
        state[d] = clip(mean[d] + p.persistence * (state[d] - mean[d]) + p.innovation_sd * N(rng), p);
        path[s][d] = state[d];
      }
    }
  };
  run(spec.drivers, c.z_mean, c.z);
  run(spec.regressors, c.x_mean, c.x);
  return c;
}

// Basis values at driver values ordered (pov, gini, middleclass).
Eigen::VectorXd basis_at(const SimSpec& spec, const std::array<double, 3>& z) {
  std::vector<double> picked;
  for (const auto& name : spec.basis.drivers) {
    for (std::size_t d = 0; d < 3; ++d) {
      if (name == kDriverNames[d]) picked.push_back(z[d]);
    }
  }
  return basis_eval(picked, spec.basis);
}

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body) {
  const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(count)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

std::vector<std::string> recorded_names(const SimSpec& spec) {
  std::vector<std::string> names{"rho"};
  const auto labels = spec.basis.labels();
  for (const char* reg : kRegressorNames) {
    for (const auto& b : labels) names.push_back(std::string(reg) + ":" + b);
  }
  return names;
}

Eigen::VectorXd recorded_truth(const SimSpec& spec) {
  Eigen::VectorXd t(1 + spec.gamma.size());
  t << spec.rho, spec.gamma;
  return t;
}

// (rho, gamma) out of a full (rho, eta, gamma) vector.
Eigen::VectorXd without_eta(const Eigen::VectorXd& theta, std::size_t n, std::size_t M) {
  Eigen::VectorXd out(1 + static_cast<Eigen::Index>(M));
  out(0) = theta(0);
  out.tail(static_cast<Eigen::Index>(M)) = theta.segment(1 + static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(M));
  return out;
}

double median(std::vector<double> v) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

nlohmann::json number_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

nlohmann::json summary_json(const std::vector<CoefficientSummary>& rows) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& s : rows) {
    out.push_back({{"name", s.name},
                   {"truth", s.truth},
                   {"count", s.count},
                   {"mean", number_or_null(s.mean)},
                   {"bias", number_or_null(s.bias)},
                   {"sd", number_or_null(s.sd)},
                   {"mc_se", number_or_null(s.mc_se)},
                   {"rmse", number_or_null(s.rmse)},
                   {"median_abs_error", number_or_null(s.median_abs_error)}});
  }
  return out;
}

}  // namespace

SimSpec::SimSpec() {
  drivers[0] = {0.25, 0.9, 0.05, 0.12, 0.01, 0.95};   // pov
  drivers[1] = {0.42, 0.9, 0.03, 0.08, 0.20, 0.65};   // gini
  drivers[2] = {0.50, 0.9, 0.03, 0.06, 0.30, 0.65};   // middleclass
  regressors[0] = {-2.66, 0.9, 0.02, 0.10, -3.5, -1.5};  // lnn
  regressors[1] = {-1.60, 0.9, 0.05, 0.40, -4.0, 0.0};   // lnsk
  regressors[2] = {1.50, 0.95, 0.03, 0.50, -1.0, 3.0};   // lnattain
  gamma = default_gamma(basis);
}

Eigen::VectorXd default_gamma(const BasisSpec& basis) {
  basis.validate();
  const std::size_t B = basis.dimension();
  const double base[3] = {-0.05, 0.05, 0.03};
  Eigen::VectorXd g(static_cast<Eigen::Index>(3 * B));
  for (std::size_t k = 0; k < 3; ++k) {
    std::size_t b = 0;
    if (basis.include_intercept) g(static_cast<Eigen::Index>(k * B + b++)) = base[k];
    for (std::size_t d = 0; d < basis.drivers.size(); ++d) {
      for (int p = 1; p <= basis.degree; ++p, ++b) {
        const double sign = (k + d + static_cast<std::size_t>(p)) % 2 ? -1.0 : 1.0;
        g(static_cast<Eigen::Index>(k * B + b)) = sign * 0.04 * (1.0 + 0.25 * static_cast<double>(k)) / p;
      }
    }
  }
  return g;
}

void SimSpec::validate() const {
  if (n < 1) invalid("n", "must be at least 1");
  if (lag < 1) invalid("lag", "must be at least 1");
  if (T < static_cast<std::size_t>(lag) + 2) invalid("T", "must be at least lag + 2");
  if (!std::isfinite(rho) || std::abs(rho) >= 1.0) invalid("rho", "must satisfy |rho| < 1");
  if (!std::isfinite(sigma2) || sigma2 < 0.0) invalid("sigma2", "must be finite and >= 0");
  if (!std::isfinite(eta_scale) || eta_scale < 0.0) invalid("eta_scale", "must be finite and >= 0");
  if (burn_in < 0) invalid("burn_in", "must be >= 0");
  try {
    basis.validate();
  } catch (const Error& e) {
    invalid("basis", e.what());
  }
  for (const auto& d : basis.drivers) {
    if (std::find_if(kDriverNames.begin(), kDriverNames.end(), [&](const char* s) { return d == s; }) ==
        kDriverNames.end()) {
      invalid("basis.drivers", "unknown driver '" + d + "'");
    }
  }
  const auto M = static_cast<Eigen::Index>(3 * basis.dimension());
  if (gamma.size() != M) {
    invalid("gamma", "expected " + std::to_string(M) + " values, got " + std::to_string(gamma.size()));
  }
  if (!gamma.allFinite()) invalid("gamma", "non-finite value");
  if (!lambda.allFinite()) invalid("lambda", "non-finite value");
  if ((lambda - lambda.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, lambda.cwiseAbs().maxCoeff())) {
    invalid("lambda", "matrix is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(lambda);
  const double min_ev = es.eigenvalues().minCoeff();
  if (min_ev < -1e-12 * std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff())) {
    invalid("lambda", "matrix is not positive semidefinite (smallest eigenvalue " + csv::format_double(min_ev) + ")");
  }
  check_process("pov", drivers[0], 0.0, 1.0, false);
  check_process("gini", drivers[1], 0.0, 1.0, true);
  check_process("middleclass", drivers[2], 0.0, 1.0, true);
  if (drivers[2].lower <= 0.0) invalid("middleclass", "clip range must exclude 0");
  for (std::size_t k = 0; k < 3; ++k) check_process(kRegressorNames[k], regressors[k], -1e300, 1e300, false);
}

SimPanel generate_panel(const SimSpec& spec, std::size_t replication) {
  return generate_panel(spec, replication, replication);
}

SimPanel generate_panel(const SimSpec& spec, std::size_t covariate_replication, std::size_t shock_replication) {
  spec.validate();
  const std::size_t l = static_cast<std::size_t>(spec.lag);
  const std::size_t burn = static_cast<std::size_t>(spec.burn_in);
  const std::size_t S = burn + spec.T;
  const std::size_t B = spec.basis.dimension();
  const Eigen::Matrix3d root = sqrt_psd(spec.lambda);
  const double nu_sd = std::sqrt(spec.sigma2);

  Eigen::MatrixXd G(3, static_cast<Eigen::Index>(B));  // row k = gamma_k'
  for (Eigen::Index k = 0; k < 3; ++k) G.row(k) = spec.gamma.segment(k * static_cast<Eigen::Index>(B), static_cast<Eigen::Index>(B)).transpose();

  const std::size_t rows = spec.n * (spec.T - l);
  SimTruth truth;
  truth.rho = spec.rho;
  truth.gamma = spec.gamma;
  truth.eta.resize(static_cast<Eigen::Index>(spec.n));
  truth.beta.resize(static_cast<Eigen::Index>(rows), 3);
  truth.u.resize(static_cast<Eigen::Index>(rows));

  std::vector<PanelObservation> obs;
  obs.reserve(spec.n * spec.T);
  std::map<std::string, std::string> groups;
  constexpr std::size_t n_labels = std::size(kGroupLabels);

  Eigen::Index row = 0;
  for (std::size_t i = 0; i < spec.n; ++i) {
    const CountryPaths cov = draw_covariates(spec, covariate_replication, i, S);
    auto rng = stream(spec.seed, shock_replication, i, kShocks);
    std::normal_distribution<double> N(0.0, 1.0);
    const double eta = spec.eta_scale * N(rng);
    truth.eta(static_cast<Eigen::Index>(i)) = eta;

    const Eigen::Vector3d x_bar(cov.x_mean[0], cov.x_mean[1], cov.x_mean[2]);
    const double y_star = (eta + x_bar.dot(G * basis_at(spec, cov.z_mean))) / (1.0 - spec.rho);

    std::vector<double> y(S, y_star);
    std::vector<Eigen::Vector3d> beta(S, Eigen::Vector3d::Zero());
    std::vector<double> u(S, 0.0);
    for (std::size_t s = 0; s < S; ++s) {
      // Draws happen for every period so the stream layout does not depend on the lag.
      Eigen::Vector3d e(N(rng), N(rng), N(rng));
      const double nu = nu_sd * N(rng);
      if (s < l) continue;
      const Eigen::Vector3d a = root * e;
      const Eigen::Vector3d x(cov.x[s - l][0], cov.x[s - l][1], cov.x[s - l][2]);
      beta[s] = G * basis_at(spec, cov.z[s - l]) + a;
      u[s] = x.dot(a) + nu;
      y[s] = spec.rho * y[s - l] + x.dot(beta[s]) + eta + nu;
    }

    const std::string name = country_name(i, spec.n);
    groups[name] = std::string(kGroupLabels[i % n_labels]);
    for (std::size_t t = 0; t < spec.T; ++t) {
      const std::size_t s = burn + t;
      PanelObservation o;
      o.country = name;
      o.year = spec.first_year + static_cast<int>(t);
      o.y = y[s];
      o.lnn = cov.x[s][0];
      o.lnsk = cov.x[s][1];
      o.lnattain = cov.x[s][2];
      o.pov = cov.z[s][0];
      o.gini = cov.z[s][1];
      o.middleclass = cov.z[s][2];
      o.y_poor = y[s] - 1.0;
      o.y_rich = y[s] + 0.8;
      obs.push_back(std::move(o));
      if (t >= l) {
        truth.beta.row(row) = beta[s].transpose();
        truth.u(row) = u[s];
        ++row;
      }
    }
  }
  return {Panel::from_observations(std::move(obs), std::move(groups)), std::move(truth)};
}

std::vector<CoefficientSummary> summarize(const std::vector<std::string>& names, const Eigen::VectorXd& truth,
                                          const std::vector<ReplicationRecord>& records, bool use_ols) {
  std::vector<CoefficientSummary> out;
  for (std::size_t j = 0; j < names.size(); ++j) {
    CoefficientSummary s;
    s.name = names[j];
    s.truth = truth(static_cast<Eigen::Index>(j));
    std::vector<double> err;
    for (const auto& r : records) {
      if (!r.ok) continue;
      const auto& v = use_ols ? r.ols_estimate : r.estimate;
      err.push_back(v(static_cast<Eigen::Index>(j)) - s.truth);
    }
    s.count = err.size();
    if (err.empty()) {
      s.mean = s.bias = s.sd = s.mc_se = s.rmse = s.median_abs_error = std::nan("");
      out.push_back(s);
      continue;
    }
    const double m = static_cast<double>(err.size());
    double sum = 0.0, sq = 0.0;
    for (double e : err) {
      sum += e;
      sq += e * e;
    }
    s.bias = sum / m;
    s.mean = s.truth + s.bias;
    double ss = 0.0;
    for (double e : err) ss += (e - s.bias) * (e - s.bias);
    s.sd = err.size() > 1 ? std::sqrt(ss / (m - 1.0)) : 0.0;
    s.mc_se = s.sd / std::sqrt(m);
    s.rmse = std::sqrt(sq / m);
    std::vector<double> abs_err;
    for (double e : err) abs_err.push_back(std::abs(e));
    s.median_abs_error = median(abs_err);
    out.push_back(s);
  }
  return out;
}

SimResult recovery_study(const SimSpec& spec, std::size_t replications, const StudyOptions& opts) {
  spec.validate();
  opts.fit.validate();
  if (replications < 1) throw Error(ErrorCode::InvalidArgument, "replications must be at least 1");
  SimResult result;
  result.names = recorded_names(spec);
  result.truth = recorded_truth(spec);
  result.replications.resize(replications);
  const std::size_t M = 3 * spec.basis.dimension();

  parallel_for(replications, opts.threads, [&](std::size_t r) {
    ReplicationRecord& rec = result.replications[r];
    rec.index = r;
    try {
      const SimPanel sp = generate_panel(spec, r);
      const AlignedPanel aligned = lag_align(sp.panel, DependentVariable::y, spec.lag);
      const StackedDesign d = build_stacked(aligned, spec.basis, opts.fixed_effects);
      if (opts.iterate) {
        const FitResult fit = fit_iterated(d, opts.fit);
        rec.estimate = without_eta(fit.theta, d.n(), M);
        rec.ols_estimate = without_eta(fit.ols_theta, d.n(), M);
        rec.std_errors = without_eta(fit.std_errors, d.n(), M);
        rec.p_values = without_eta(fit.p_values, d.n(), M);
        rec.converged = fit.converged;
        rec.iterations = fit.iterations;
      } else {
        const LeastSquaresSolution s = ols(d);
        rec.estimate = rec.ols_estimate = without_eta(s.theta, d.n(), M);
        rec.std_errors = rec.p_values = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(1 + M), std::nan(""));
        rec.converged = true;
      }
      rec.ok = true;
    } catch (const Error& e) {
      rec.ok = false;
      rec.error = e.what();
    }
  });

  for (const auto& r : result.replications) {
    if (!r.ok) ++result.failures;
    else if (!r.converged) ++result.nonconverged;
  }
  result.summary = summarize(result.names, result.truth, result.replications, false);
  result.ols_summary = summarize(result.names, result.truth, result.replications, true);
  return result;
}

double rejection_rate(const SimResult& result, std::size_t coefficient, double alpha) {
  std::size_t used = 0, rejected = 0;
  for (const auto& r : result.replications) {
    if (!r.ok) continue;
    const double p = r.p_values(static_cast<Eigen::Index>(coefficient));
    if (!std::isfinite(p)) continue;
    ++used;
    if (p < alpha) ++rejected;
  }
  return used ? static_cast<double>(rejected) / static_cast<double>(used) : std::nan("");
}

VarianceReport variance_structure_check(const SimSpec& spec, std::size_t replications, unsigned threads) {
  spec.validate();
  if (replications < 2) throw Error(ErrorCode::InvalidArgument, "replications must be at least 2");
  const std::size_t rows = spec.n * (spec.T - static_cast<std::size_t>(spec.lag));
  const auto R = static_cast<Eigen::Index>(replications);
  Eigen::MatrixXd U(static_cast<Eigen::Index>(rows), R);
  std::vector<double> recon(replications, 0.0);
  Eigen::MatrixXd X;  // identical across replications

  // Replication 0 first, to fix the covariates.
  auto one = [&](std::size_t r) {
    const SimPanel sp = generate_panel(spec, 0, r);
    const AlignedPanel a = lag_align(sp.panel, DependentVariable::y, spec.lag);
    const StackedDesign d = build_stacked(a, spec.basis, true);
    Eigen::VectorXd u = d.y - spec.rho * d.y_lag - d.C * sp.truth.eta - d.W * spec.gamma;
    U.col(static_cast<Eigen::Index>(r)) = u;
    recon[r] = (u - sp.truth.u).cwiseAbs().maxCoeff();
    if (r == 0) X = a.x;
  };
  one(0);
  parallel_for(replications - 1, threads, [&](std::size_t r) { one(r + 1); });

  VarianceReport rep;
  rep.replications = replications;
  rep.max_reconstruction_error = *std::max_element(recon.begin(), recon.end());
  const double Rd = static_cast<double>(replications);

  auto moment = [&](const Eigen::VectorXd& prod, double target, double& mean, double& se) {
    mean = prod.mean();
    const double var = (prod.array() - mean).square().sum() / (Rd - 1.0);
    se = std::sqrt(var / Rd);
    return se > 0.0 ? std::abs(mean - target) <= 3.0 * se : std::abs(mean - target) <= 1e-12;
  };

  const std::size_t periods = spec.T - static_cast<std::size_t>(spec.lag);
  double sum_emp = 0.0, sum_target = 0.0;
  std::size_t cell_ok = 0;
  for (std::size_t c = 0; c < rows; ++c) {
    const auto ci = static_cast<Eigen::Index>(c);
    CellCheck cell;
    cell.country = c / periods;
    cell.year = spec.first_year + static_cast<int>(spec.lag + c % periods);
    const Eigen::Vector3d x = X.row(ci).transpose();
    cell.target = x.dot(spec.lambda * x) + spec.sigma2;
    const Eigen::VectorXd sq = U.row(ci).transpose().array().square();
    cell.within = moment(sq, cell.target, cell.empirical, cell.std_error);
    cell_ok += cell.within;
    sum_emp += cell.empirical;
    sum_target += cell.target;
    rep.cells.push_back(cell);
  }
  rep.cell_pass_fraction = static_cast<double>(cell_ok) / static_cast<double>(rows);
  rep.pooled_relative_error = sum_target > 0.0 ? std::abs(sum_emp - sum_target) / sum_target : std::abs(sum_emp);

  std::size_t pair_ok = 0;
  auto add_pair = [&](std::size_t a, std::size_t b) {
    PairCheck p;
    p.first = a;
    p.second = b;
    const Eigen::VectorXd prod =
        U.row(static_cast<Eigen::Index>(a)).transpose().cwiseProduct(U.row(static_cast<Eigen::Index>(b)).transpose());
    p.within = moment(prod, 0.0, p.empirical, p.std_error);
    pair_ok += p.within;
    rep.pairs.push_back(p);
  };
  for (std::size_t c = 0; c < rows; ++c) {
    if ((c + 1) % periods != 0) add_pair(c, c + 1);  // next year, same country
    if (c + periods < rows) add_pair(c, c + periods);  // same year, next country
  }
  rep.pair_pass_fraction = rep.pairs.empty() ? 1.0 : static_cast<double>(pair_ok) / static_cast<double>(rep.pairs.size());
  return rep;
}

std::vector<NickellRow> nickell_bias_study(const std::vector<double>& rho_grid, const SimSpec& base,
                                           std::size_t replications, const NickellOptions& opts) {
  if (rho_grid.empty()) throw Error(ErrorCode::InvalidArgument, "empty rho grid");
  std::vector<NickellRow> out;
  for (double rho : rho_grid) {
    SimSpec spec = base;
    spec.rho = rho;
    StudyOptions so = opts.study;
    so.iterate = opts.estimator == NickellEstimator::iterated;
    const SimResult res = recovery_study(spec, replications, so);
    NickellRow row;
    row.rho = rho;
    row.periods = spec.T - static_cast<std::size_t>(spec.lag);
    row.replications = res.summary.front().count;
    row.rho_bias = res.summary.front().bias;
    row.rho_mc_se = res.summary.front().mc_se;
    row.others.assign(res.summary.begin() + 1, res.summary.end());
    row.pass = row.replications > 0;
    for (const auto& s : row.others) {
      row.max_abs_other_bias = std::max(row.max_abs_other_bias, std::abs(s.bias));
      if (!(std::abs(s.bias) < opts.benchmark + 3.0 * s.mc_se)) row.pass = false;
    }
    out.push_back(std::move(row));
  }
  return out;
}

void write_replications_csv(std::ostream& out, const SimResult& result) {
  std::vector<std::string> header{"replication", "ok", "converged", "iterations", "error"};
  for (const char* prefix : {"est:", "ols:", "se:", "p:"}) {
    for (const auto& n : result.names) header.push_back(prefix + n);
  }
  csv::write_row(out, header);
  const std::size_t m = result.names.size();
  for (const auto& r : result.replications) {
    std::vector<std::string> f{std::to_string(r.index), r.ok ? "1" : "0", r.converged ? "1" : "0",
                               std::to_string(r.iterations), r.error};
    for (const Eigen::VectorXd* v : {&r.estimate, &r.ols_estimate, &r.std_errors, &r.p_values}) {
      for (std::size_t j = 0; j < m; ++j) {
        f.push_back(r.ok ? csv::format_double((*v)(static_cast<Eigen::Index>(j))) : "");
      }
    }
    csv::write_row(out, f);
  }
}

nlohmann::json recovery_summary(const SimResult& result) {
  return {{"format", "vcgrowth.recovery/1"},
          {"replications", result.replications.size()},
          {"failures", result.failures},
          {"nonconverged", result.nonconverged},
          {"weighted", summary_json(result.summary)},
          {"ols", summary_json(result.ols_summary)}};
}

void write_variance_csv(std::ostream& out, const VarianceReport& report) {
  csv::write_row(out, {"country", "year", "target", "empirical", "std_error", "within"});
  for (const auto& c : report.cells) {
    csv::write_row(out, {std::to_string(c.country), std::to_string(c.year), csv::format_double(c.target),
                         csv::format_double(c.empirical), csv::format_double(c.std_error), c.within ? "1" : "0"});
  }
}

nlohmann::json variance_summary(const VarianceReport& report) {
  std::size_t pair_ok = 0;
  for (const auto& p : report.pairs) pair_ok += p.within;
  return {{"format", "vcgrowth.variance/1"},
          {"replications", report.replications},
          {"cells", report.cells.size()},
          {"cell_pass_fraction", report.cell_pass_fraction},
          {"pairs", report.pairs.size()},
          {"pairs_within", pair_ok},
          {"pair_pass_fraction", report.pair_pass_fraction},
          {"pooled_relative_error", report.pooled_relative_error},
          {"max_reconstruction_error", report.max_reconstruction_error}};
}

void write_nickell_csv(std::ostream& out, const std::vector<NickellRow>& rows) {
  csv::write_row(out, {"rho", "periods", "replications", "rho_bias", "rho_mc_se", "max_abs_other_bias", "status"});
  for (const auto& r : rows) {
    csv::write_row(out, {csv::format_double(r.rho), std::to_string(r.periods), std::to_string(r.replications),
                         csv::format_double(r.rho_bias), csv::format_double(r.rho_mc_se),
                         csv::format_double(r.max_abs_other_bias), r.pass ? "PASS" : "FLAG"});
  }
}

nlohmann::json nickell_summary(const std::vector<NickellRow>& rows, const NickellOptions& opts) {
  nlohmann::json table = nlohmann::json::array();
  for (const auto& r : rows) {
    table.push_back({{"rho", r.rho},
                     {"periods", r.periods},
                     {"replications", r.replications},
                     {"rho_bias", number_or_null(r.rho_bias)},
                     {"rho_mc_se", number_or_null(r.rho_mc_se)},
                     {"max_abs_other_bias", r.max_abs_other_bias},
                     {"status", r.pass ? "PASS" : "FLAG"},
                     {"others", summary_json(r.others)}});
  }
  return {{"format", "vcgrowth.nickell/1"},
          {"estimator", opts.estimator == NickellEstimator::ols ? "ols" : "iterated"},
          {"fixed_effects", opts.study.fixed_effects},
          {"benchmark", opts.benchmark},
          {"rule", "PASS when every non-rho |bias| < benchmark + 3 * mc_se"},
          {"rows", table}};
}

}  // namespace vcg
