#pragma once

#include <cstdio>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

namespace srj::csv {

inline constexpr const char* kSchemaLine = "# schema=1";

/// 17 significant digits, round-trips any double.
inline std::string real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::vector<std::string> split(const std::string& line, char sep = ',') {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, sep)) out.push_back(field);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

/// Next non-comment, non-empty line; false at end of input.
inline bool next_record(std::istream& is, std::string& line) {
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    return true;
  }
  return false;
}

}  // namespace srj::csv
