#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "twp/coordinator.hpp"
#include "twp/wire.hpp"

namespace twp::cli {

// Exit codes: 0 success, 1 usage, 2 data error, 3 runtime failure.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitRuntime = 3;

// Bad or corrupt input data (logs, CSV, config); maps to exit code 2.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::vector<uint8_t> read_file_bytes(const std::filesystem::path& path);
std::string read_file_text(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path,
                      const std::vector<uint8_t>& bytes);
void write_file_text(const std::filesystem::path& path,
                     const std::string& text);

// Loads `<dir>/<node_id>/<segment>.twplog` for every roster node, segments
// concatenated in index order.  Decode failures become DataError with the
// file and byte offset.
std::vector<std::vector<LogRecord>> load_mesh_logs(
    const std::filesystem::path& dir, std::size_t roster_size);

Roster load_roster(const std::filesystem::path& path);

// True when the CI environment variable is exactly "1".
bool ci_mode();

// Throws UsageError if CI mode demands an explicit seed and none was given.
void require_seed_in_ci(bool seed_given, const std::string& subcommand);

}  // namespace twp::cli
