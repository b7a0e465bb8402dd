#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

#include "seqlab/error.hpp"

namespace seqlab {

/// Shortest decimal form that round-trips back to the same double.
inline std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

/// Strict double parse of an entire token; locale-independent, '.' decimal.
inline double parse_double(std::string_view s, const std::string& context) {
    double v = 0.0;
    const auto* first = s.data();
    const auto* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) {
        throw DataError("not a number: '" + std::string(s) + "' (" + context + ")");
    }
    return v;
}

inline long parse_long(std::string_view s, const std::string& context) {
    long v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw DataError("not an integer: '" + std::string(s) + "' (" + context + ")");
    }
    return v;
}

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

/// Fixed two-decimal display with half-up rounding, the convention used by
/// all report tables (e.g. 96.575 -> "96.58").
inline std::string format_round2(double v) {
    const double scaled = v * 100.0;
    long long cents = 0;
    if (v >= 0) {
        cents = static_cast<long long>(std::floor(scaled + 0.5));
    } else {
        cents = -static_cast<long long>(std::floor(-scaled + 0.5));
    }
    char buf[48];
    const long long whole = cents / 100;
    const long long frac = std::llabs(cents % 100);
    std::snprintf(buf, sizeof(buf), "%s%lld.%02lld",
                  (cents < 0 && whole == 0) ? "-" : "", whole, frac);
    return std::string(buf);
}

/// Numeric value of the two-decimal half-up display rounding.
inline double round2(double v) {
    if (v >= 0) return std::floor(v * 100.0 + 0.5) / 100.0;
    return -std::floor(-v * 100.0 + 0.5) / 100.0;
}

}  // namespace seqlab
