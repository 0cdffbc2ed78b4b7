#pragma once

#include <cstdio>
#include <string>

namespace ellipflow {

/// Canonical floating-point text form: 17 significant digits, round-trip safe.
inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace ellipflow
