#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

namespace qmg::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumeric = 3;

// One record per command invocation that writes files.
struct RunManifest {
  std::string command;
  nlohmann::json parameters = nlohmann::json::object();
  std::optional<std::uint64_t> seed;
  std::string version;
  std::vector<std::string> outputs;
  double wall_clock_seconds = 0.0;

  nlohmann::json to_json() const;
};

// Runs the command line `args` (args[0] is the program name). Results go to
// `out`, diagnostics and usage text to `err`. Returns the process exit code:
// 0 success, 2 usage or argument error, 3 numeric or degeneracy error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Writes `contents` to a sibling temporary file and renames it over `path`.
// Throws std::runtime_error when the file cannot be written.
void write_file_atomic(const std::string& path, const std::string& contents);

std::string version();

}  // namespace qmg::cli
