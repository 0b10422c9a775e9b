#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <string>

namespace hpiconv {

/// Shortest round-trip decimal form; locale independent so output bytes are reproducible.
inline std::string format_double(double v)
{
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::array<char, 32> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return {buf.data(), ptr};
}

/// Fixed-precision form for human-facing tables.
inline std::string format_fixed(double v, int digits)
{
    if (!std::isfinite(v)) return format_double(v);
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v,
                                   std::chars_format::fixed, digits);
    return {buf.data(), ptr};
}

}  // namespace hpiconv
