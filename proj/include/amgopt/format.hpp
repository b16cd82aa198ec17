#pragma once

#include <cstdio>
#include <string>

namespace amgopt {

/// Six significant digits.
inline std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace amgopt
