#pragma once

#include <string>
#include <stdexcept>
#include <vector>

namespace twp {

class CsvError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Minimal CSV support for the artifact's own outputs: comma-separated,
// header row, no quoting (values never contain commas).
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const;  // throws CsvError
};

CsvTable read_csv(const std::string& path);
CsvTable parse_csv(const std::string& text);

// Fixed-precision float formatting shared by every writer so reruns are
// byte-identical.
std::string format_double(double v);

void write_csv(const std::string& path, const CsvTable& table);

}  // namespace twp
