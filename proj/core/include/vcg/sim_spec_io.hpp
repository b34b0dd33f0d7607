#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "vcg/simulate.hpp"

namespace vcg {

/// A simulation file: DGP keys at top level, optional [pov] / [gini] /
/// [middleclass] / [lnn] / [lnsk] / [lnattain] process sections, and an
/// optional [study] section handed back verbatim for the caller.
///
///   n = 40
///   T = 20
///   rho = 0.93
///   lambda = 1e-4, 0, 0; 0, 1e-4, 0; 0, 0, 1e-4   (or three diagonal values)
///   gamma = ...                                    (defaults to default_gamma)
///   [gini]
///   mean = 0.42
struct SimFile {
  SimSpec spec;
  std::map<std::string, std::string> study;
};

/// Throws InvalidSpec naming the key for unknown keys, malformed values or a
/// spec that fails validation.
[[nodiscard]] SimFile read_sim_file(std::istream& in, std::string_view source = "<stream>");
[[nodiscard]] SimFile load_sim_file(const std::filesystem::path& path);

/// Writes every key, so read_sim_file(write_sim_spec(s)).spec reproduces s.
void write_sim_spec(std::ostream& out, const SimSpec& spec);
[[nodiscard]] nlohmann::json sim_spec_to_json(const SimSpec& spec);

}  // namespace vcg
