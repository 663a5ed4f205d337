#pragma once

#include <charconv>
#include <string>

namespace rcdepth {

/// Shortest decimal string that round-trips the exact double. Used for all
/// emitted numbers so output files are byte-stable.
inline std::string format_double(double v) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;  // 32 bytes always suffice for the shortest form
    return std::string(buf, end);
}

}  // namespace rcdepth
