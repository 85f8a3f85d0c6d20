#pragma once

#include <cstdio>
#include <initializer_list>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "geodist/version.hpp"

namespace geodist::tsv {

/// Stable text rendering for doubles; enough digits to round-trip.
inline std::string num(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", value);
  return buf;
}

/// One-line `#` header carrying the tool version and the column names.
inline void write_header(std::ostream& out,
                         std::initializer_list<std::string_view> columns) {
  out << "# geodist " << kVersion;
  for (std::string_view c : columns) out << '\t' << c;
  out << '\n';
}

inline std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

}  // namespace geodist::tsv
