#pragma once

#include <charconv>
#include <string>

namespace stratlink {

// Shortest representation that round-trips; keeps data files byte-stable.
inline std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace stratlink
