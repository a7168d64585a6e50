#pragma once

#include <cstdio>
#include <string>

namespace epw::detail {

// 17 significant digits, enough for the value to round-trip.
inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace epw::detail
