#pragma once

#include <chrono>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace vcg::cli {

/// Lower-case hex SHA-256 of a byte string / file.
[[nodiscard]] std::string sha256_hex(std::string_view bytes);
[[nodiscard]] std::string sha256_file(const std::filesystem::path& path);

/// Record of one command invocation, written as manifest.json next to the
/// outputs. Everything except `timing` is a function of the inputs.
class RunManifest {
 public:
  RunManifest(std::string command, std::vector<std::string> argv);

  void set_config(nlohmann::json config);
  void add_input(const std::filesystem::path& path);
  /// Registers a file already written under the output directory.
  void add_output(const std::filesystem::path& path);
  void set_status(std::string status);

  [[nodiscard]] nlohmann::json to_json() const;
  /// Writes `dir`/manifest.json.
  void write(const std::filesystem::path& dir) const;

  [[nodiscard]] const std::vector<std::filesystem::path>& outputs() const noexcept { return outputs_; }

 private:
  std::string command_;
  std::vector<std::string> argv_;
  nlohmann::json config_ = nlohmann::json::object();
  std::vector<std::pair<std::string, std::string>> inputs_;  // path, digest
  std::vector<std::filesystem::path> outputs_;
  std::string status_ = "ok";
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

}  // namespace vcg::cli
