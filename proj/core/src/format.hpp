#pragma once

#include <charconv>
#include <string>

namespace driftscope::detail {

// Shortest form that round-trips a double.
inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace driftscope::detail
