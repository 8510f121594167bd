#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "cglab/config.hpp"

namespace cglab {

struct ArtifactEntry {
  std::string file;  // relative to the output directory
  std::uintmax_t bytes = 0;
  std::string sha256;
};

struct RunManifest {
  std::string config_echo;  // canonical JSON
  std::string version;
  std::uint64_t seed = 0;
  std::string started;   // UTC, ISO 8601
  std::string finished;
  long long steps = 0;   // time steps of the primary run (0 when not applicable)
  std::vector<std::pair<std::string, bool>> criteria;
  std::vector<ArtifactEntry> outputs;

  bool all_pass() const;
  std::string to_json() const;
};

/// Lowercase hex SHA-256 digest of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

/// Runs the configured experiment, writing its CSV files, summary.json and
/// manifest.json under cfg.out. Module errors propagate.
RunManifest dispatch(const RunConfig& cfg);

/// One-line JSON error report for a failed run.
std::string error_report(const std::exception& e);

}  // namespace cglab
