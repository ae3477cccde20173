#pragma once
// Config-driven command runner behind the holderlab executable.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "holderlab/io.hpp"

namespace holderlab {

/// Exit codes of the executable.
enum ExitCode : int { kSuccess = 0, kConfigError = 1, kNumericError = 2 };

struct CliOverrides {
  std::optional<std::filesystem::path> out;
  std::optional<std::uint64_t> seed;
  std::optional<NumericMode> mode;
  std::size_t threads = 1;
};

struct RunConfig {
  SystemSpec spec;
  std::string command;
  nlohmann::json params;  // command parameters with defaults filled in
  std::filesystem::path output_dir;
  std::filesystem::path cache_dir;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
};

/// Reads {"system", "command", "params"?, "output_dir"?, "seed"?}; unknown
/// keys anywhere are rejected. The cache directory is HOLDERLAB_CACHE when set,
/// else <output_dir>/.cache.
RunConfig load_config(const nlohmann::json& doc, const CliOverrides& overrides);

using FileSet = std::map<std::string, std::string>;  // file name -> bytes

/// Runs the command and returns the produced files without writing them.
FileSet execute(const RunConfig& config);

/// Stable 64-bit FNV-1a.
std::uint64_t fnv1a(const std::string& bytes);
std::string cache_key(const RunConfig& config);

/// execute() behind the file cache; writes outputs and manifest.json into the
/// output directory. Returns true on a cache hit.
bool run(const RunConfig& config, std::ostream& log);

/// Full executable behaviour, including flag parsing and exit codes.
int main_entry(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace holderlab
