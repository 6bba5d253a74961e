#pragma once

// Shortest round-trip formatting for doubles, for CSV and CLI output that
// must be byte-stable across runs.

#include <charconv>
#include <string>
#include <system_error>

namespace rampstor {

inline std::string format_double(double x) {
  if (x == 0.0) x = 0.0;  // merge the signed zeros
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  if (res.ec != std::errc()) return "nan";
  return std::string(buf, res.ptr);
}

}  // namespace rampstor
