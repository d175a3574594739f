#ifndef DISSOLVE_CSV_HPP
#define DISSOLVE_CSV_HPP

#include "dissolve/types.hpp"

#include <charconv>
#include <cstdio>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace dissolve {

/// Shortest-safe text for a double: 17 significant digits round-trip exactly.
inline std::string format_double(double v) {
  char buf[32];
  const int len = std::snprintf(buf, sizeof buf, "%.17g", v);
  return std::string(buf, static_cast<std::size_t>(len));
}

inline std::vector<std::string> split_csv_line(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.emplace_back(line.substr(start));
      break;
    }
    fields.emplace_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

/// Locale-independent (dot decimal) parse of a whole cell. Row and column are
/// zero-based and only used in the error message.
inline double parse_double(std::string_view cell, const std::string& file, std::size_t row,
                           std::size_t col) {
  const std::string_view s = trim(cell);
  double v = 0.0;
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  if (!s.empty() && *begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, v);
  if (s.empty() || ec != std::errc() || ptr != end) {
    throw ParseError(file + ": row " + std::to_string(row) + ", column " + std::to_string(col) +
                     ": not a number: '" + std::string(cell) + "'");
  }
  return v;
}

}  // namespace dissolve

#endif  // DISSOLVE_CSV_HPP
