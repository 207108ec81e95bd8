#pragma once

#include <cmath>
#include <cstdio>
#include <optional>
#include <string>

namespace sis {

/// Round-trippable decimal text: 17 significant digits, "nan"/"inf" spelled out.
inline std::string format_g17(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string format_g17(const std::optional<double>& v) { return v ? format_g17(*v) : "nan"; }

} // namespace sis
