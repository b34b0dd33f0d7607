#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace vcg {

/// One country-year row of every model variable.
struct PanelObservation {
  std::string country;
  int year = 0;
  double y = 0.0;           // log GDP per worker
  double lnn = 0.0;         // log(population growth + 0.05)
  double lnsk = 0.0;        // log investment share
  double lnattain = 0.0;    // log educational attainment
  double pov = 0.0;         // poverty headcount fraction
  double gini = 0.0;
  double middleclass = 0.0; // income share of the 20th..80th percentile
  double y_poor = 0.0;      // log mean income of the bottom quintile
  double y_rich = 0.0;      // log mean income of the top quintile

  bool operator==(const PanelObservation&) const = default;
};

/// Region labels accepted in the `group` column.
inline constexpr std::string_view kGroupLabels[] = {"Asia", "Latin", "SSA", "HI", "Other"};

/// Column names for every PanelObservation field plus the group column.
struct PanelSchema {
  std::string country = "country";
  std::string group = "group";
  std::string year = "year";
  std::string y = "y";
  std::string lnn = "lnn";
  std::string lnsk = "lnsk";
  std::string lnattain = "lnattain";
  std::string pov = "pov";
  std::string gini = "gini";
  std::string middleclass = "middleclass";
  std::string y_poor = "y_poor";
  std::string y_rich = "y_rich";
};

/// Balanced country-by-year panel. Immutable after construction; rows are
/// stored country-major (countries sorted by name) then year-minor.
class Panel {
 public:
  /// Validates and normalizes. Throws DuplicateRow, UnbalancedPanel,
  /// NonFiniteValue, InvalidValue or UnmappedCountry.
  static Panel from_observations(std::vector<PanelObservation> observations,
                                 std::map<std::string, std::string> group_of);

  [[nodiscard]] std::size_t n() const noexcept { return countries_.size(); }
  [[nodiscard]] std::size_t T() const noexcept { return years_.size(); }
  [[nodiscard]] const std::vector<std::string>& countries() const noexcept { return countries_; }
  [[nodiscard]] const std::vector<int>& years() const noexcept { return years_; }
  [[nodiscard]] const std::vector<PanelObservation>& observations() const noexcept { return obs_; }
  [[nodiscard]] const std::map<std::string, std::string>& group_of() const noexcept { return group_of_; }
  [[nodiscard]] const std::string& group(std::size_t country) const { return group_of_.at(countries_[country]); }

  /// Observation for country index i and year index t.
  [[nodiscard]] const PanelObservation& at(std::size_t i, std::size_t t) const { return obs_[i * years_.size() + t]; }

  bool operator==(const Panel&) const = default;

 private:
  std::vector<PanelObservation> obs_;
  std::vector<std::string> countries_;
  std::vector<int> years_;
  std::map<std::string, std::string> group_of_;
};

Panel read_panel(std::istream& in, const PanelSchema& schema = {}, std::string_view source = "<stream>");
Panel ingest_panel(const std::filesystem::path& path, const PanelSchema& schema = {});

/// Writes the canonical CSV layout (default schema names). Values use the
/// shortest round-trip representation so ingest(export(p)) == p.
void write_panel(std::ostream& out, const Panel& panel);
void export_panel(const std::filesystem::path& path, const Panel& panel);

enum class DependentVariable { y, y_poor, y_rich };

[[nodiscard]] std::string_view to_string(DependentVariable dep) noexcept;
/// Throws InvalidArgument for anything but y | y_poor | y_rich.
[[nodiscard]] DependentVariable parse_dependent(std::string_view name);

/// Lag-aligned estimation sample: for every country and every period t >= l,
/// the dependent value at t paired with the dependent value, regressors and
/// distributional drivers dated t - l.
struct AlignedPanel {
  DependentVariable dep = DependentVariable::y;
  int lag = 1;
  std::size_t n = 0;
  std::size_t periods = 0;  // T - l
  std::vector<std::string> countries;
  std::vector<std::string> groups;  // per country
  std::vector<std::string> regressor_names{"lnn", "lnsk", "lnattain"};
  std::vector<std::string> driver_names{"pov", "gini", "middleclass"};

  std::vector<std::size_t> country_index;  // per row
  std::vector<int> year;                   // per row; year of the dependent value
  Eigen::VectorXd y;
  Eigen::VectorXd y_lag;
  Eigen::MatrixXd x;  // rows x regressors
  Eigen::MatrixXd z;  // rows x drivers

  [[nodiscard]] std::size_t rows() const noexcept { return static_cast<std::size_t>(y.size()); }
  bool operator==(const AlignedPanel&) const;
};

/// Requires 1 <= lag <= T - 2: InvalidLag below, LagTooDeep above.
AlignedPanel lag_align(const Panel& panel, DependentVariable dep, int lag);

}  // namespace vcg
