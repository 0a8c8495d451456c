#pragma once

#include <charconv>
#include <string>
#include <system_error>

namespace bdk {

/// Shortest decimal text that reads back to the same double.
inline std::string fmt_double(double v) {
  char buf[32];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

}  // namespace bdk
