#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "qlab/errors.hpp"

namespace qlab {

inline constexpr std::string_view kToolVersion = "0.1.0";

inline std::uint64_t fnv1a64(std::string_view data,
                             std::uint64_t hash = 0xcbf29ce484222325ull) {
  for (const char c : data) {
    hash ^= static_cast<unsigned char>(c);
    hash *= 0x100000001b3ull;
  }
  return hash;
}

inline std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[i] = digits[v & 0xf];
    v >>= 4;
  }
  return s;
}

inline std::string file_digest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string() + " for digest");
  std::uint64_t hash = 0xcbf29ce484222325ull;
  char buf[8192];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0)
    hash = fnv1a64(std::string_view(buf, static_cast<std::size_t>(in.gcount())),
                   hash);
  return hex64(hash);
}

// One manifest per command invocation. manifest_id is a digest of the
// deterministic core (command, config, seeds, input digests), so re-running
// the same inputs reproduces the same id; created_utc is informational.
struct RunManifest {
  std::string tool = "qubitlab";
  std::string tool_version{kToolVersion};
  std::string command_line;
  std::uint64_t seed = 0;
  std::string config_digest;  // empty when the command takes no config
  std::map<std::string, std::string> input_digests;
  std::vector<std::string> outputs;
  std::string manifest_id;
  std::string created_utc;
};

inline std::string utc_now_iso8601() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline void finalize_manifest(RunManifest& m) {
  std::string core = m.command_line;
  core += '\x1f';
  core += m.config_digest;
  core += '\x1f';
  core += std::to_string(m.seed);
  for (const auto& [path, digest] : m.input_digests) {
    core += '\x1f';
    core += path;
    core += '=';
    core += digest;
  }
  m.manifest_id = hex64(fnv1a64(core));
  m.created_utc = utc_now_iso8601();
}

inline void write_manifest(const std::filesystem::path& path,
                           const RunManifest& m) {
  nlohmann::json j;
  j["tool"] = m.tool;
  j["tool_version"] = m.tool_version;
  j["command_line"] = m.command_line;
  j["seed"] = m.seed;
  j["config_digest"] = m.config_digest;
  j["input_digests"] = m.input_digests;
  j["outputs"] = m.outputs;
  j["manifest_id"] = m.manifest_id;
  j["created_utc"] = m.created_utc;
  std::filesystem::create_directories(path.parent_path().empty()
                                          ? std::filesystem::path(".")
                                          : path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

}  // namespace qlab
