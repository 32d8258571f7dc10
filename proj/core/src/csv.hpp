#pragma once

#include <charconv>
#include <cstdint>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

#include "driftscope/error.hpp"

namespace driftscope::detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split_row(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

// Reads the header line and checks it against the expected column names.
inline void expect_header(std::istream& in, const std::vector<std::string_view>& columns, const char* what) {
  std::string line;
  if (!std::getline(in, line)) throw DataError(std::string(what) + ": empty file");
  const auto got = split_row(line);
  if (got != columns) throw DataError(std::string(what) + ": unexpected header '" + std::string(trim(line)) + "'");
}

inline double parse_double(std::string_view s, const char* what) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw DataError(std::string(what) + ": malformed number '" + std::string(s) + "'");
  return v;
}

inline std::uint64_t parse_uint(std::string_view s, const char* what) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw DataError(std::string(what) + ": malformed integer '" + std::string(s) + "'");
  return v;
}

}  // namespace driftscope::detail
