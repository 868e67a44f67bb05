#pragma once

#include <charconv>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace mtjsnn {

// Locale-independent number formatting, 9 significant digits.
inline std::string format_g9(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 9);
    return std::string(buf, res.ptr);
}

// Shortest representation that round-trips exactly.
inline std::string format_shortest(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view text, const std::string& context) {
    double v = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    while (first != last && (*first == ' ' || *first == '\t')) ++first;
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc{}) {
        throw std::runtime_error(context + ": cannot parse number from '" + std::string(text) + "'");
    }
    return v;
}

inline long long parse_int(std::string_view text, const std::string& context) {
    long long v = 0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    while (first != last && (*first == ' ' || *first == '\t')) ++first;
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc{}) {
        throw std::runtime_error(context + ": cannot parse integer from '" + std::string(text) + "'");
    }
    return v;
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

}  // namespace mtjsnn
