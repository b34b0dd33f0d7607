#include "manifest.hpp"

#include <Eigen/Core>
#include <fstream>
#include <iterator>

#include <openssl/evp.h>

#include "vcg/error.hpp"
#include "version.hpp"

namespace vcg::cli {

std::string sha256_hex(std::string_view bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::IoError, "SHA-256 digest failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return sha256_hex(bytes);
}

RunManifest::RunManifest(std::string command, std::vector<std::string> argv)
    : command_(std::move(command)), argv_(std::move(argv)) {}

void RunManifest::set_config(nlohmann::json config) { config_ = std::move(config); }

void RunManifest::add_input(const std::filesystem::path& path) { inputs_.emplace_back(path.string(), sha256_file(path)); }

void RunManifest::add_output(const std::filesystem::path& path) { outputs_.push_back(path); }

void RunManifest::set_status(std::string status) { status_ = std::move(status); }

nlohmann::json RunManifest::to_json() const {
  nlohmann::json inputs = nlohmann::json::array();
  for (const auto& [p, d] : inputs_) inputs.push_back({{"path", p}, {"sha256", d}});
  nlohmann::json outputs = nlohmann::json::array();
  for (const auto& p : outputs_) {
    outputs.push_back({{"path", p.filename().string()},
                       {"bytes", std::filesystem::file_size(p)},
                       {"sha256", sha256_file(p)}});
  }
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  return {{"format", "vcgrowth.manifest/1"},
          {"command", command_},
          {"argv", argv_},
          {"status", status_},
          {"config", config_},
          {"config_sha256", sha256_hex(config_.dump())},
          {"inputs", inputs},
          {"outputs", outputs},
          {"versions",
           {{"vcgrowth", kVersion},
            {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                          std::to_string(EIGEN_MINOR_VERSION)},
            {"compiler", __VERSION__}}},
          {"timing", {{"elapsed_seconds", elapsed}}}};
}

void RunManifest::write(const std::filesystem::path& dir) const {
  std::ofstream out(dir / "manifest.json");
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + (dir / "manifest.json").string());
  out << to_json().dump(2) << "\n";
}

}  // namespace vcg::cli
