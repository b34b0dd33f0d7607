#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "vcg/design.hpp"
#include "vcg/estimator.hpp"
#include "vcg/panel_store.hpp"

namespace vcg {

struct CurveConfig {
  std::size_t points = 200;
  double level = 0.95;  // pointwise normal band
  bool allow_nonconverged = false;
};

/// beta_k as a function of one driver, other drivers held at their pooled
/// sample means.
struct CoefficientCurve {
  std::size_t k = 0;
  std::string regressor;
  std::string driver;
  double level = 0.95;
  std::vector<double> grid;
  std::vector<double> beta;
  std::vector<double> half_width;
  double max_band_width = 0.0;  // max over the grid of the full band width (2 * half_width)
};

/// Throws UnknownDriver, NotConvergedFit (unless cfg.allow_nonconverged),
/// InvalidArgument when the driver does not vary in the sample.
[[nodiscard]] CoefficientCurve eval_curve(const FitResult& fit, const StackedDesign& d, std::size_t k,
                                          const std::string& driver, const AlignedPanel& aligned,
                                          const CurveConfig& cfg = {});

/// Conditional-mean coefficients beta_itk = ztilde_{i(t-l)}' gamma_k for every
/// aligned observation.
struct ObservationBetas {
  std::vector<RowKey> rows;
  std::vector<std::string> countries;
  std::vector<std::string> regressor_names;
  Eigen::MatrixXd beta;  // rows x K
};

[[nodiscard]] ObservationBetas observation_betas(const FitResult& fit, const StackedDesign& d,
                                                 const AlignedPanel& aligned);

struct FiveNumber {
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
};

/// Quantile of a sorted sample by linear interpolation of order statistics
/// placed at p_j = (j - 0.5) / m, clamped to the extremes.
[[nodiscard]] double sample_quantile(std::span<const double> sorted, double p);
[[nodiscard]] FiveNumber five_number(std::vector<double> sample);

struct GroupStats {
  std::string group;
  std::size_t k = 0;
  std::string regressor;
  std::size_t count = 0;
  FiveNumber summary;
};

/// Per group (sorted by label) and regressor. Throws UnmappedCountry.
[[nodiscard]] std::vector<GroupStats> group_boxstats(const ObservationBetas& betas,
                                                     const std::map<std::string, std::string>& grouping);

void write_curve_csv(std::ostream& out, const CoefficientCurve& curve);
void write_boxstats_csv(std::ostream& out, const std::vector<GroupStats>& stats);
[[nodiscard]] nlohmann::json curves_summary(const std::vector<CoefficientCurve>& curves,
                                            const std::vector<GroupStats>& stats);

}  // namespace vcg
