#include "cli/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace conetest::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

bool parse_number(const std::string& s, double& value) {
  if (s.empty()) return false;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  return ec == std::errc() && ptr == last;
}

std::string unquote(const std::string& s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') {
    return s.substr(1, s.size() - 2);
  }
  return s;
}

}  // namespace

CsvError::CsvError(const std::string& path, int line, int column,
                   const std::string& what)
    : Error(ErrorCategory::input,
            path + ":" + std::to_string(line) +
                (column > 0 ? ":" + std::to_string(column) : std::string()) +
                ": " + what),
      line_(line),
      column_(column) {}

CsvMatrix parse_csv(const std::string& text, const std::string& path) {
  CsvMatrix out;
  std::vector<std::vector<double>> rows;
  std::size_t width = 0;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  bool first_content = true;
  while (std::getline(in, raw)) {
    ++line_no;
    if (line_no == 1 && raw.rfind("\xEF\xBB\xBF", 0) == 0) raw.erase(0, 3);
    if (trim(raw).empty()) continue;
    const auto fields = split(raw);
    std::vector<double> row(fields.size());
    int bad_column = 0;
    for (std::size_t j = 0; j < fields.size(); ++j) {
      if (!parse_number(fields[j], row[j])) {
        bad_column = static_cast<int>(j) + 1;
        break;
      }
    }
    if (first_content) {
      first_content = false;
      width = fields.size();
      if (bad_column > 0) {
        for (const auto& f : fields) out.header.push_back(unquote(f));
        continue;
      }
    }
    if (fields.size() != width) {
      throw CsvError(path, line_no, 0,
                     "expected " + std::to_string(width) + " fields, found " +
                         std::to_string(fields.size()));
    }
    if (bad_column > 0) {
      throw CsvError(path, line_no, bad_column,
                     "not a number: '" + fields[bad_column - 1] + "'");
    }
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (!std::isfinite(row[j])) {
        throw CsvError(path, line_no, static_cast<int>(j) + 1, "non-finite value");
      }
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw CsvError(path, line_no, 0, "no numeric rows");
  out.values.resize(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(width));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < width; ++j) out.values(i, j) = rows[i][j];
  return out;
}

CsvMatrix read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str(), path);
}

}  // namespace conetest::cli
