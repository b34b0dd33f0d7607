#include "vcg/sim_spec_io.hpp"

#include <charconv>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "vcg/csv.hpp"
#include "vcg/error.hpp"

namespace vcg {
namespace {

namespace pt = boost::property_tree;

[[noreturn]] void bad(const std::string& key, const std::string& why) {
  throw Error(ErrorCode::InvalidSpec, key + ": " + why);
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double to_number(const std::string& key, const std::string& text) {
  auto v = csv::parse_double(trim(text));
  if (!v || !std::isfinite(*v)) bad(key, "'" + text + "' is not a finite number");
  return *v;
}

template <typename Int>
Int to_integer(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  Int v{};
  auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || p != t.data() + t.size()) bad(key, "'" + text + "' is not an integer");
  return v;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (c == ',' || c == ';' || c == ' ' || c == '\t') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::vector<double> to_numbers(const std::string& key, const std::string& text) {
  std::vector<double> out;
  for (const auto& s : split_list(text)) out.push_back(to_number(key, s));
  return out;
}

bool to_bool(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  bad(key, "'" + text + "' is not a boolean");
}

void read_process(const pt::ptree& section, const std::string& name, ArProcess& p) {
  for (const auto& [key, node] : section) {
    const std::string full = name + "." + key;
    const std::string& v = node.data();
    if (key == "mean") p.mean = to_number(full, v);
    else if (key == "persistence") p.persistence = to_number(full, v);
    else if (key == "innovation_sd") p.innovation_sd = to_number(full, v);
    else if (key == "country_sd") p.country_sd = to_number(full, v);
    else if (key == "lower") p.lower = to_number(full, v);
    else if (key == "upper") p.upper = to_number(full, v);
    else bad(full, "unknown key");
  }
}

std::string join(const Eigen::VectorXd& v) {
  std::string out;
  for (Eigen::Index i = 0; i < v.size(); ++i) out += (i ? ", " : "") + csv::format_double(v(i));
  return out;
}

void write_process(std::ostream& out, const char* name, const ArProcess& p) {
  out << "\n[" << name << "]\n"
      << "mean = " << csv::format_double(p.mean) << "\n"
      << "persistence = " << csv::format_double(p.persistence) << "\n"
      << "innovation_sd = " << csv::format_double(p.innovation_sd) << "\n"
      << "country_sd = " << csv::format_double(p.country_sd) << "\n"
      << "lower = " << csv::format_double(p.lower) << "\n"
      << "upper = " << csv::format_double(p.upper) << "\n";
}

nlohmann::json process_json(const ArProcess& p) {
  return {{"mean", p.mean},         {"persistence", p.persistence}, {"innovation_sd", p.innovation_sd},
          {"country_sd", p.country_sd}, {"lower", p.lower},             {"upper", p.upper}};
}

}  // namespace

SimFile read_sim_file(std::istream& in, std::string_view source) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorCode::InvalidSpec, std::string(source) + " line " + std::to_string(e.line()) + ": " + e.message());
  }

  SimFile file;
  SimSpec& s = file.spec;
  bool gamma_given = false;
  std::vector<double> gamma;
  for (const auto& [key, node] : tree) {
    const std::string& v = node.data();
    if (!node.empty()) {
      bool found = false;
      for (std::size_t d = 0; d < 3; ++d) {
        if (key == kDriverNames[d]) read_process(node, key, s.drivers[d]), found = true;
        if (key == kRegressorNames[d]) read_process(node, key, s.regressors[d]), found = true;
      }
      if (key == "study") {
        for (const auto& [k, child] : node) file.study[k] = trim(child.data());
        found = true;
      }
      if (!found) bad(key, "unknown section");
      continue;
    }
    if (key == "n") s.n = to_integer<std::size_t>(key, v);
    else if (key == "T") s.T = to_integer<std::size_t>(key, v);
    else if (key == "lag") s.lag = to_integer<int>(key, v);
    else if (key == "first_year") s.first_year = to_integer<int>(key, v);
    else if (key == "rho") s.rho = to_number(key, v);
    else if (key == "sigma2") s.sigma2 = to_number(key, v);
    else if (key == "eta_scale") s.eta_scale = to_number(key, v);
    else if (key == "burn_in") s.burn_in = to_integer<int>(key, v);
    else if (key == "seed") s.seed = to_integer<std::uint64_t>(key, v);
    else if (key == "degree") s.basis.degree = to_integer<int>(key, v);
    else if (key == "intercept") s.basis.include_intercept = to_bool(key, v);
    else if (key == "drivers") s.basis.drivers = split_list(v);
    else if (key == "gamma") gamma = to_numbers(key, v), gamma_given = true;
    else if (key == "lambda") {
      const auto l = to_numbers(key, v);
      if (l.size() == 3) {
        s.lambda = Eigen::Vector3d(l[0], l[1], l[2]).asDiagonal();
      } else if (l.size() == 9) {
        for (int r = 0; r < 3; ++r)
          for (int c = 0; c < 3; ++c) s.lambda(r, c) = l[static_cast<std::size_t>(3 * r + c)];
      } else {
        bad(key, "expected 3 (diagonal) or 9 (row-major) values, got " + std::to_string(l.size()));
      }
    } else {
      bad(key, "unknown key");
    }
  }
  if (gamma_given) {
    s.gamma = Eigen::Map<const Eigen::VectorXd>(gamma.data(), static_cast<Eigen::Index>(gamma.size()));
  } else {
    try {
      s.gamma = default_gamma(s.basis);
    } catch (const Error& e) {
      bad("basis", e.what());
    }
  }
  s.validate();
  return file;
}

SimFile load_sim_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return read_sim_file(in, path.string());
}

void write_sim_spec(std::ostream& out, const SimSpec& s) {
  std::string drivers;
  for (const auto& d : s.basis.drivers) drivers += (drivers.empty() ? "" : ", ") + d;
  Eigen::VectorXd lambda(9);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) lambda(3 * r + c) = s.lambda(r, c);
  out << "n = " << s.n << "\n"
      << "T = " << s.T << "\n"
      << "lag = " << s.lag << "\n"
      << "first_year = " << s.first_year << "\n"
      << "rho = " << csv::format_double(s.rho) << "\n"
      << "sigma2 = " << csv::format_double(s.sigma2) << "\n"
      << "eta_scale = " << csv::format_double(s.eta_scale) << "\n"
      << "burn_in = " << s.burn_in << "\n"
      << "seed = " << s.seed << "\n"
      << "degree = " << s.basis.degree << "\n"
      << "intercept = " << (s.basis.include_intercept ? "true" : "false") << "\n"
      << "drivers = " << drivers << "\n"
      << "gamma = " << join(s.gamma) << "\n"
      << "lambda = " << join(lambda) << "\n";
  for (std::size_t d = 0; d < 3; ++d) write_process(out, kDriverNames[d], s.drivers[d]);
  for (std::size_t k = 0; k < 3; ++k) write_process(out, kRegressorNames[k], s.regressors[k]);
}

nlohmann::json sim_spec_to_json(const SimSpec& s) {
  nlohmann::json lambda = nlohmann::json::array();
  for (int r = 0; r < 3; ++r) lambda.push_back({s.lambda(r, 0), s.lambda(r, 1), s.lambda(r, 2)});
  nlohmann::json processes;
  for (std::size_t d = 0; d < 3; ++d) processes[kDriverNames[d]] = process_json(s.drivers[d]);
  for (std::size_t k = 0; k < 3; ++k) processes[kRegressorNames[k]] = process_json(s.regressors[k]);
  return {{"n", s.n},
          {"T", s.T},
          {"lag", s.lag},
          {"first_year", s.first_year},
          {"rho", s.rho},
          {"sigma2", s.sigma2},
          {"eta_scale", s.eta_scale},
          {"burn_in", s.burn_in},
          {"seed", s.seed},
          {"basis", {{"drivers", s.basis.drivers}, {"degree", s.basis.degree}, {"intercept", s.basis.include_intercept}}},
          {"gamma", std::vector<double>(s.gamma.data(), s.gamma.data() + s.gamma.size())},
          {"lambda", lambda},
          {"processes", processes}};
}

}  // namespace vcg
