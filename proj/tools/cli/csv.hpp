#pragma once

#include <string>
#include <vector>

#include <conetest/errors.hpp>
#include <conetest/sample.hpp>

namespace conetest::cli {

/// Malformed numeric CSV; line and column are one-based (column 0 when the
/// whole line is at fault).
class CsvError : public Error {
 public:
  CsvError(const std::string& path, int line, int column, const std::string& what);

  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

struct CsvMatrix {
  Matrix values;
  std::vector<std::string> header;  // empty when the file has none
};

/// Comma-separated numbers, one row per line. A first row containing any
/// non-numeric field is taken as a header. Blank lines are skipped.
CsvMatrix parse_csv(const std::string& text, const std::string& path = "<input>");
CsvMatrix read_csv(const std::string& path);

}  // namespace conetest::cli
