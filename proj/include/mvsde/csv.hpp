#pragma once

#include <charconv>
#include <string>

namespace mvsde {

// Shortest text that round-trips to the same double; locale independent.
inline std::string fmt_num(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

}  // namespace mvsde
