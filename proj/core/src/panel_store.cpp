#include "vcg/panel_store.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

#include "vcg/csv.hpp"
#include "vcg/error.hpp"

namespace vcg {

namespace {

constexpr std::size_t kMaxListed = 20;

std::string row_label(const PanelObservation& o) { return o.country + "/" + std::to_string(o.year); }

void check_row(const PanelObservation& o) {
  const std::pair<const char*, double> fields[] = {
      {"y", o.y},       {"lnn", o.lnn},   {"lnsk", o.lnsk},         {"lnattain", o.lnattain},
      {"pov", o.pov},   {"gini", o.gini}, {"middleclass", o.middleclass}, {"y_poor", o.y_poor},
      {"y_rich", o.y_rich}};
  for (const auto& [name, value] : fields) {
    if (!std::isfinite(value)) {
      throw Error(ErrorCode::NonFiniteValue, "row " + row_label(o) + ": field '" + name + "' is not finite");
    }
  }
  if (o.pov < 0.0 || o.pov > 1.0) throw Error(ErrorCode::InvalidValue, "row " + row_label(o) + ": pov outside [0,1]");
  if (o.gini < 0.0 || o.gini >= 1.0) throw Error(ErrorCode::InvalidValue, "row " + row_label(o) + ": gini outside [0,1)");
  if (o.middleclass <= 0.0 || o.middleclass >= 1.0) {
    throw Error(ErrorCode::InvalidValue, "row " + row_label(o) + ": middleclass outside (0,1)");
  }
  if (o.y_poor > o.y_rich) throw Error(ErrorCode::InvalidValue, "row " + row_label(o) + ": y_poor exceeds y_rich");
}

bool known_group(const std::string& g) {
  return std::find(std::begin(kGroupLabels), std::end(kGroupLabels), g) != std::end(kGroupLabels);
}

double dependent_value(const PanelObservation& o, DependentVariable dep) {
  switch (dep) {
    case DependentVariable::y: return o.y;
    case DependentVariable::y_poor: return o.y_poor;
    case DependentVariable::y_rich: return o.y_rich;
  }
  return o.y;
}

}  // namespace

Panel Panel::from_observations(std::vector<PanelObservation> observations,
                               std::map<std::string, std::string> group_of) {
  for (const auto& o : observations) check_row(o);

  std::sort(observations.begin(), observations.end(), [](const PanelObservation& a, const PanelObservation& b) {
    return a.country != b.country ? a.country < b.country : a.year < b.year;
  });
  for (std::size_t i = 1; i < observations.size(); ++i) {
    if (observations[i].country == observations[i - 1].country && observations[i].year == observations[i - 1].year) {
      throw Error(ErrorCode::DuplicateRow, "duplicate row " + row_label(observations[i]));
    }
  }
  if (observations.empty()) throw Error(ErrorCode::UnbalancedPanel, "panel has no observations");

  Panel p;
  std::set<int> year_set;
  for (const auto& o : observations) {
    if (p.countries_.empty() || p.countries_.back() != o.country) p.countries_.push_back(o.country);
    year_set.insert(o.year);
  }
  const int first = *year_set.begin();
  const int last = *year_set.rbegin();
  for (int y = first; y <= last; ++y) p.years_.push_back(y);

  // Every (country, year) pair over the contiguous year span must be present.
  std::vector<std::string> missing;
  std::size_t missing_count = 0;
  std::size_t k = 0;
  for (const auto& c : p.countries_) {
    std::set<int> have;
    while (k < observations.size() && observations[k].country == c) have.insert(observations[k++].year);
    for (int y : p.years_) {
      if (!have.count(y)) {
        ++missing_count;
        if (missing.size() < kMaxListed) missing.push_back(c + "/" + std::to_string(y));
      }
    }
  }
  if (missing_count) {
    std::ostringstream msg;
    msg << missing_count << " missing (country/year) pairs:";
    for (const auto& m : missing) msg << ' ' << m;
    if (missing_count > missing.size()) msg << " ...";
    throw Error(ErrorCode::UnbalancedPanel, msg.str());
  }

  for (const auto& c : p.countries_) {
    auto it = group_of.find(c);
    if (it == group_of.end()) throw Error(ErrorCode::UnmappedCountry, "no group for country " + c);
    if (!known_group(it->second)) {
      throw Error(ErrorCode::InvalidValue, "country " + c + ": unknown group '" + it->second +
                                               "' (expected Asia, Latin, SSA, HI or Other)");
    }
    p.group_of_.emplace(c, it->second);
  }
  p.obs_ = std::move(observations);
  return p;
}

Panel read_panel(std::istream& in, const PanelSchema& schema, std::string_view source) {
  const auto table = csv::Table::parse(in, source);
  const std::size_t c_country = table.require(schema.country);
  const std::size_t c_group = table.require(schema.group);
  const std::size_t c_year = table.require(schema.year);
  const std::size_t cols[] = {table.require(schema.y),        table.require(schema.lnn),
                              table.require(schema.lnsk),     table.require(schema.lnattain),
                              table.require(schema.pov),      table.require(schema.gini),
                              table.require(schema.middleclass), table.require(schema.y_poor),
                              table.require(schema.y_rich)};

  std::vector<PanelObservation> obs;
  obs.reserve(table.rows());
  std::map<std::string, std::string> groups;
  for (std::size_t r = 0; r < table.rows(); ++r) {
    PanelObservation o;
    o.country = table.cell(r, c_country);
    o.year = static_cast<int>(table.integer(r, c_year));
    double* targets[] = {&o.y, &o.lnn, &o.lnsk, &o.lnattain, &o.pov, &o.gini, &o.middleclass, &o.y_poor, &o.y_rich};
    for (std::size_t f = 0; f < std::size(cols); ++f) {
      *targets[f] = table.number(r, cols[f]);
      if (!std::isfinite(*targets[f])) {
        throw Error(ErrorCode::NonFiniteValue, std::string(source) + " line " + std::to_string(table.line_of(r)) +
                                                   ": column '" + table.header()[cols[f]] + "' is not finite");
      }
    }
    const std::string& g = table.cell(r, c_group);
    auto [it, inserted] = groups.emplace(o.country, g);
    if (!inserted && it->second != g) {
      throw Error(ErrorCode::InvalidValue, std::string(source) + " line " + std::to_string(table.line_of(r)) +
                                               ": country " + o.country + " has conflicting groups");
    }
    obs.push_back(std::move(o));
  }
  return Panel::from_observations(std::move(obs), std::move(groups));
}

Panel ingest_panel(const std::filesystem::path& path, const PanelSchema& schema) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return read_panel(in, schema, path.string());
}

void write_panel(std::ostream& out, const Panel& panel) {
  const PanelSchema s;
  csv::write_row(out, {s.country, s.group, s.year, s.y, s.lnn, s.lnsk, s.lnattain, s.pov, s.gini, s.middleclass,
                       s.y_poor, s.y_rich});
  using csv::format_double;
  for (const auto& o : panel.observations()) {
    csv::write_row(out, {o.country, panel.group_of().at(o.country), std::to_string(o.year), format_double(o.y),
                         format_double(o.lnn), format_double(o.lnsk), format_double(o.lnattain),
                         format_double(o.pov), format_double(o.gini), format_double(o.middleclass),
                         format_double(o.y_poor), format_double(o.y_rich)});
  }
}

void export_panel(const std::filesystem::path& path, const Panel& panel) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  write_panel(out, panel);
}

std::string_view to_string(DependentVariable dep) noexcept {
  switch (dep) {
    case DependentVariable::y: return "y";
    case DependentVariable::y_poor: return "y_poor";
    case DependentVariable::y_rich: return "y_rich";
  }
  return "y";
}

DependentVariable parse_dependent(std::string_view name) {
  if (name == "y") return DependentVariable::y;
  if (name == "y_poor") return DependentVariable::y_poor;
  if (name == "y_rich") return DependentVariable::y_rich;
  throw Error(ErrorCode::InvalidArgument, "dependent variable must be y, y_poor or y_rich, got '" +
                                              std::string(name) + "'");
}

bool AlignedPanel::operator==(const AlignedPanel& o) const {
  return dep == o.dep && lag == o.lag && n == o.n && periods == o.periods && countries == o.countries &&
         groups == o.groups && regressor_names == o.regressor_names && driver_names == o.driver_names &&
         country_index == o.country_index && year == o.year && y == o.y && y_lag == o.y_lag && x == o.x &&
         z == o.z;
}

AlignedPanel lag_align(const Panel& panel, DependentVariable dep, int lag) {
  if (lag < 1) throw Error(ErrorCode::InvalidLag, "lag must be >= 1, got " + std::to_string(lag));
  const auto T = static_cast<long>(panel.T());
  if (lag > T - 2) {
    throw Error(ErrorCode::LagTooDeep, "lag " + std::to_string(lag) + " requires T >= " + std::to_string(lag + 2) +
                                           ", panel has T = " + std::to_string(T));
  }
  const std::size_t l = static_cast<std::size_t>(lag);
  AlignedPanel a;
  a.dep = dep;
  a.lag = lag;
  a.n = panel.n();
  a.periods = panel.T() - l;
  a.countries = panel.countries();
  for (std::size_t i = 0; i < a.n; ++i) a.groups.push_back(panel.group(i));

  const std::size_t rows = a.n * a.periods;
  a.country_index.reserve(rows);
  a.year.reserve(rows);
  a.y.resize(static_cast<Eigen::Index>(rows));
  a.y_lag.resize(static_cast<Eigen::Index>(rows));
  a.x.resize(static_cast<Eigen::Index>(rows), 3);
  a.z.resize(static_cast<Eigen::Index>(rows), 3);

  Eigen::Index r = 0;
  for (std::size_t i = 0; i < a.n; ++i) {
    for (std::size_t t = l; t < panel.T(); ++t, ++r) {
      const auto& now = panel.at(i, t);
      const auto& past = panel.at(i, t - l);
      a.country_index.push_back(i);
      a.year.push_back(now.year);
      a.y(r) = dependent_value(now, dep);
      a.y_lag(r) = dependent_value(past, dep);
      a.x.row(r) << past.lnn, past.lnsk, past.lnattain;
      a.z.row(r) << past.pov, past.gini, past.middleclass;
    }
  }
  return a;
}

}  // namespace vcg
