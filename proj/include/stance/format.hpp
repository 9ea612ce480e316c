#pragma once

// Decimal rendering with explicit tie-breaking. Values are snapped to a 1e-9
// grid before rounding so that binary representation noise (80.65 is stored
// as 80.65000000000000568...) does not decide ties.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <string_view>

#include "stance/error.hpp"
#include "stance/unicode.hpp"

namespace stance {

enum class Rounding { HalfUp, HalfEven };

inline std::string_view to_string(Rounding r) {
    return r == Rounding::HalfUp ? "half-up" : "half-even";
}

inline Rounding parse_rounding(std::string_view s) {
    if (s == "half-up") return Rounding::HalfUp;
    if (s == "half-even") return Rounding::HalfEven;
    throw PreconditionError("unknown rounding mode '" + std::string(s) + "' (expected half-up or half-even)");
}

namespace detail {

inline constexpr int kGridDigits = 9;

inline std::int64_t pow10(int n) {
    std::int64_t p = 1;
    while (n-- > 0) p *= 10;
    return p;
}

/// Integer division rounding to nearest; ties broken by `mode`, away from zero for HalfUp.
inline std::int64_t div_round(std::int64_t num, std::int64_t den, Rounding mode) {
    const bool neg = num < 0;
    const std::int64_t a = neg ? -num : num;
    std::int64_t q = a / den;
    const std::int64_t r = a % den;
    if (2 * r > den || (2 * r == den && (mode == Rounding::HalfUp || q % 2 == 1))) ++q;
    return neg ? -q : q;
}

inline std::string render_scaled(std::int64_t scaled, int decimals) {
    const bool neg = scaled < 0;
    const std::int64_t a = neg ? -scaled : scaled;
    const std::int64_t p = pow10(decimals);
    std::string out = neg ? "-" : "";
    out += std::to_string(a / p);
    if (decimals > 0) {
        std::string frac = std::to_string(a % p);
        out += '.';
        out += std::string(static_cast<std::size_t>(decimals) - frac.size(), '0') + frac;
    }
    return out;
}

}  // namespace detail

/// Rounds `value` to `decimals` places (0..6) and returns the rounded number.
inline double round_decimal(double value, int decimals, Rounding mode) {
    const auto grid = static_cast<std::int64_t>(std::llround(value * static_cast<double>(detail::pow10(detail::kGridDigits))));
    const std::int64_t q = detail::div_round(grid, detail::pow10(detail::kGridDigits - decimals), mode);
    return static_cast<double>(q) / static_cast<double>(detail::pow10(decimals));
}

/// Pads `s` with spaces to `width` code points (UTF-8 aware).
inline std::string pad_right(std::string s, std::size_t width) {
    const auto n = unicode::length(s);
    if (n < width) s.append(width - n, ' ');
    return s;
}

/// Fixed-point rendering of `value` with `decimals` places; "-0.0" is printed as "0.0".
inline std::string format_fixed(double value, int decimals, Rounding mode = Rounding::HalfUp) {
    if (!std::isfinite(value)) return std::isnan(value) ? "nan" : (value > 0 ? "inf" : "-inf");
    const auto grid = static_cast<std::int64_t>(std::llround(value * static_cast<double>(detail::pow10(detail::kGridDigits))));
    const std::int64_t q = detail::div_round(grid, detail::pow10(detail::kGridDigits - decimals), mode);
    return detail::render_scaled(q, decimals);
}

/// Exact rendering of num/den as a percentage, computed in integers.
inline std::string format_ratio_percent(std::int64_t num, std::int64_t den, int decimals,
                                        Rounding mode = Rounding::HalfUp) {
    if (den <= 0) throw PreconditionError("format_ratio_percent: non-positive denominator");
    const std::int64_t q = detail::div_round(num * 100 * detail::pow10(decimals), den, mode);
    return detail::render_scaled(q, decimals);
}

/// Shortest text that reads back to the same double.
inline std::string format_exact(double value) {
    char buf[64];
    for (int prec = 15; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, value);
        if (std::strtod(buf, nullptr) == value) break;
    }
    return buf;
}

}  // namespace stance
