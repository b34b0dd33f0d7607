#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "expect_error.hpp"
#include "oracles.hpp"
#include "vcg/design.hpp"
#include "vcg/estimator.hpp"
#include "vcg/simulate.hpp"

using namespace vcg;

namespace {

AlignedPanel one_row(double x1, double x2, double x3, double z1, double z2, double z3) {
  AlignedPanel a;
  a.n = 1;
  a.periods = 1;
  a.countries = {"A"};
  a.groups = {"Asia"};
  a.country_index = {0};
  a.year = {2000};
  a.y = Eigen::VectorXd::Constant(1, 1.0);
  a.y_lag = Eigen::VectorXd::Constant(1, 0.5);
  a.x = Eigen::RowVector3d(x1, x2, x3);
  a.z = Eigen::RowVector3d(z1, z2, z3);
  return a;
}

}  // namespace

TEST(Basis, DefaultDimensionAndLabels) {
  const BasisSpec s;
  EXPECT_EQ(s.dimension(), 7u);
  EXPECT_EQ(s.labels(), (std::vector<std::string>{"1", "pov", "pov^2", "gini", "gini^2", "middleclass",
                                                  "middleclass^2"}));
  BasisSpec two;
  two.drivers = {"pov", "gini"};
  two.degree = 1;
  EXPECT_EQ(two.dimension(), 3u);
  BasisSpec zero;
  zero.degree = 0;
  EXPECT_EQ(zero.dimension(), 1u);
  BasisSpec empty;
  empty.degree = 0;
  empty.include_intercept = false;
  EXPECT_VCG_ERROR(empty.validate(), ErrorCode::InvalidConfig);
}

TEST(Basis, Evaluation) {
  const std::vector<double> zero{0, 0, 0};
  const auto e1 = basis_eval(zero, {});
  EXPECT_EQ(e1, (Eigen::VectorXd(7) << 1, 0, 0, 0, 0, 0, 0).finished());
  const std::vector<double> z{0.2, 0.5, 0.4};
  const auto v = basis_eval(z, {});
  const auto want = oracle::quadratic_basis(0.2, 0.5, 0.4);
  for (int b = 0; b < 7; ++b) EXPECT_DOUBLE_EQ(v(b), want[static_cast<std::size_t>(b)]);
  EXPECT_NEAR(v(2), 0.04, 1e-17);
}

TEST(Basis, Errors) {
  const std::vector<double> bad{0.1, NAN, 0.2};
  EXPECT_VCG_ERROR(basis_eval(bad, {}), ErrorCode::NonFiniteDriver);
  const std::vector<double> short_z{0.1, 0.2};
  EXPECT_VCG_ERROR(basis_eval(short_z, {}), ErrorCode::DimensionMismatch);
}

TEST(Stacked, SingleRowBlockFormula) {
  const AlignedPanel a = one_row(-2.6, -1.4, 1.2, 0.2, 0.5, 0.4);
  const StackedDesign d = build_stacked(a);
  ASSERT_EQ(d.W.rows(), 1);
  ASSERT_EQ(d.W.cols(), 21);
  const auto zt = oracle::quadratic_basis(0.2, 0.5, 0.4);
  const double x[3] = {-2.6, -1.4, 1.2};
  for (int k = 0; k < 3; ++k)
    for (int b = 0; b < 7; ++b) EXPECT_DOUBLE_EQ(d.W(0, 7 * k + b), x[k] * zt[static_cast<std::size_t>(b)]);
}

TEST(Stacked, FullScaleDimensions) {
  const Panel p = ingest_panel(std::string(VCG_FIXTURES_DIR) + "/synthetic81.csv");
  const StackedDesign d = build_stacked(lag_align(p, DependentVariable::y, 3));
  EXPECT_EQ(d.M(), 21u);
  EXPECT_EQ(d.rows(), 2268u);
  EXPECT_EQ(d.C.rows(), 2268);
  EXPECT_EQ(d.C.cols(), 81);
  EXPECT_EQ(d.W.cols(), 21);
  EXPECT_EQ(d.coefficients(), 103u);
  for (Eigen::Index r = 0; r < d.C.rows(); ++r) ASSERT_EQ(d.C.row(r).sum(), 1.0);
  for (Eigen::Index c = 0; c < d.C.cols(); ++c) ASSERT_EQ(d.C.col(c).sum(), 28.0);
  EXPECT_EQ(d.coefficient_name(0), "rho");
  EXPECT_EQ(d.coefficient_name(1), "eta[C001]");
  EXPECT_EQ(d.coefficient_name(d.gamma_offset() + 7 + 4), "lnsk:gini^2");
}

TEST(Stacked, InterceptOnlyBasisGivesPlainRegressors) {
  const AlignedPanel a = lag_align(oracle::toy_panel(3, 6), DependentVariable::y, 1);
  BasisSpec s;
  s.degree = 0;
  const StackedDesign d = build_stacked(a, s);
  EXPECT_EQ(d.W, a.x);
}

TEST(Stacked, ReconstructionMatchesObservationSums) {
  const AlignedPanel a = lag_align(oracle::toy_panel(5, 8, 3), DependentVariable::y, 2);
  const StackedDesign d = build_stacked(a);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> N(0.0, 1.0);
  Eigen::VectorXd gamma(21);
  for (auto& g : gamma) g = N(rng);
  const Eigen::VectorXd stacked = d.W * gamma;
  for (Eigen::Index r = 0; r < static_cast<Eigen::Index>(a.rows()); ++r) {
    const auto zt = oracle::quadratic_basis(a.z(r, 0), a.z(r, 1), a.z(r, 2));
    double sum = 0.0;
    for (int k = 0; k < 3; ++k) {
      double beta = 0.0;
      for (int b = 0; b < 7; ++b) beta += zt[static_cast<std::size_t>(b)] * gamma(7 * k + b);
      sum += a.x(r, k) * beta;
    }
    EXPECT_NEAR(stacked(r), sum, 1e-12);
  }
}

TEST(Stacked, UnknownDriver) {
  BasisSpec s;
  s.drivers = {"pov", "theil"};
  EXPECT_VCG_ERROR(build_stacked(lag_align(oracle::toy_panel(2, 4), DependentVariable::y, 1), s),
                   ErrorCode::UnknownDriver);
}

TEST(Identification, FixturePasses) {
  const Panel p = ingest_panel(std::string(VCG_FIXTURES_DIR) + "/synthetic81.csv");
  const auto rep = check_identification(build_stacked(lag_align(p, DependentVariable::y, 3)));
  EXPECT_TRUE(rep.pass);
  EXPECT_EQ(rep.rank, 103u);
  EXPECT_EQ(rep.deficiency, 0u);
  // Rank cross-check with a different decomposition.
  Eigen::FullPivHouseholderQR<Eigen::MatrixXd> qr(build_stacked(lag_align(p, DependentVariable::y, 3)).regressors());
  qr.setThreshold(1e-10);
  EXPECT_EQ(qr.rank(), 103);
}

TEST(Identification, IdenticalConstantDriversFail) {
  std::vector<PanelObservation> obs;
  std::map<std::string, std::string> groups;
  for (int i = 0; i < 4; ++i) {
    const std::string c = "Q" + std::to_string(i);
    groups[c] = "Other";
    for (int t = 0; t < 10; ++t) {
      PanelObservation o;
      o.country = c;
      o.year = 1990 + t;
      o.y = 1.0 + 0.1 * t * t + i;
      o.lnn = -2.6;
      o.lnsk = -1.5;
      o.lnattain = 1.1;
      o.pov = 0.2;
      o.gini = 0.4;
      o.middleclass = 0.5;
      o.y_poor = o.y - 1;
      o.y_rich = o.y + 1;
      obs.push_back(o);
    }
  }
  const auto rep = check_identification(
      build_stacked(lag_align(Panel::from_observations(obs, groups), DependentVariable::y, 1)));
  EXPECT_FALSE(rep.pass);
  EXPECT_GT(rep.deficiency, 0u);
}

TEST(Identification, TooFewRowsFail) {
  const auto rep = check_identification(build_stacked(lag_align(oracle::toy_panel(1, 12), DependentVariable::y, 1)));
  EXPECT_EQ(rep.rows, 11u);
  EXPECT_FALSE(rep.pass);
}

TEST(Stacked, PermutingCountryLabelsPermutesEta) {
  SimSpec spec;
  spec.n = 6;
  spec.T = 15;
  spec.lambda = Eigen::Vector3d(1e-4, 1e-4, 1e-4).asDiagonal();
  const Panel p = generate_panel(spec, 3).panel;
  // Rename so that the sorted order is reversed.
  std::vector<PanelObservation> obs = p.observations();
  std::map<std::string, std::string> groups;
  for (auto& o : obs) {
    const int idx = std::stoi(o.country.substr(1));
    o.country = "Z" + std::to_string(100 - idx);
    groups[o.country] = "Other";
  }
  const Panel q = Panel::from_observations(obs, groups);
  const FitResult a = fit_iterated(build_stacked(lag_align(p, DependentVariable::y, 1)));
  const FitResult b = fit_iterated(build_stacked(lag_align(q, DependentVariable::y, 1)));
  EXPECT_NEAR(a.rho, b.rho, 1e-9);
  EXPECT_LT((a.gamma - b.gamma).cwiseAbs().maxCoeff(), 1e-8);
  for (Eigen::Index i = 0; i < 6; ++i) EXPECT_NEAR(a.eta(i), b.eta(5 - i), 1e-8);
}

TEST(Stacked, DesignCsvHasLeadingKeys) {
  std::ostringstream out;
  write_design_csv(out, build_stacked(lag_align(oracle::toy_panel(2, 4), DependentVariable::y, 1)));
  const std::string s = out.str();
  EXPECT_EQ(s.substr(0, s.find(',', s.find(',') + 1)), "country,year");
  EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 7);
}
