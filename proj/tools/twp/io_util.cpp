#include "io_util.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace twp::cli {

namespace fs = std::filesystem;

std::vector<uint8_t> read_file_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
  return bytes;
}

std::string read_file_text(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file_bytes(const fs::path& path, const std::vector<uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

void write_file_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

std::vector<std::vector<LogRecord>> load_mesh_logs(const fs::path& dir,
                                                   std::size_t roster_size) {
  std::vector<std::vector<LogRecord>> logs(roster_size);
  for (std::size_t id = 0; id < roster_size; ++id) {
    fs::path node_dir = dir / std::to_string(id);
    if (!fs::exists(node_dir)) continue;  // node may have uploaded nothing
    std::vector<std::pair<uint64_t, fs::path>> segments;
    for (const auto& entry : fs::directory_iterator(node_dir)) {
      if (entry.path().extension() != ".twplog") continue;
      segments.emplace_back(std::stoull(entry.path().stem().string()),
                            entry.path());
    }
    std::sort(segments.begin(), segments.end());
    for (const auto& [index, path] : segments) {
      auto bytes = read_file_bytes(path);
      try {
        auto records = decode_record_stream(bytes);
        logs[id].insert(logs[id].end(), records.begin(), records.end());
      } catch (const CodecError& e) {
        throw DataError(path.string() + ": " + e.what());
      }
    }
  }
  return logs;
}

Roster load_roster(const fs::path& path) {
  try {
    return Roster::from_file_text(read_file_text(path));
  } catch (const std::runtime_error& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

bool ci_mode() {
  const char* ci = std::getenv("CI");
  return ci != nullptr && std::string(ci) == "1";
}

void require_seed_in_ci(bool seed_given, const std::string& subcommand) {
  if (ci_mode() && !seed_given)
    throw UsageError("CI=1 requires an explicit --seed for `twp " +
                     subcommand + "`");
}

}  // namespace twp::cli
