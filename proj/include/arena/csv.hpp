#pragma once

// Small CSV/number formatting helpers shared by the exporters. Numbers are
// rendered with std::to_chars so output is byte-stable and round-trips
// exactly through a parse.

#include <charconv>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace arena {

inline std::string fmt_double(double x) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), x);
    if (ec != std::errc()) throw std::runtime_error("fmt_double: conversion failed");
    return std::string(buf, p);
}

inline std::string fmt_int(std::int64_t x) {
    char buf[32];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), x);
    if (ec != std::errc()) throw std::runtime_error("fmt_int: conversion failed");
    return std::string(buf, p);
}

inline std::string fmt_opt(const std::optional<double>& x) {
    return x ? fmt_double(*x) : std::string();
}

inline std::vector<std::string> split_csv_row(std::string_view line) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (true) {
        const std::size_t comma = line.find(',', pos);
        if (comma == std::string_view::npos) {
            out.emplace_back(line.substr(pos));
            break;
        }
        out.emplace_back(line.substr(pos, comma - pos));
        pos = comma + 1;
    }
    return out;
}

inline double parse_double_field(const std::string& s, const char* what) {
    double v = 0.0;
    const char* b = s.data();
    const char* e = b + s.size();
    auto [p, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || p != e) {
        throw std::invalid_argument(std::string(what) + ": bad number `" + s + "`");
    }
    return v;
}

inline std::optional<double> parse_opt_field(const std::string& s, const char* what) {
    if (s.empty()) return std::nullopt;
    return parse_double_field(s, what);
}

inline std::int64_t parse_int_field(const std::string& s, const char* what) {
    std::int64_t v = 0;
    const char* b = s.data();
    const char* e = b + s.size();
    auto [p, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || p != e) {
        throw std::invalid_argument(std::string(what) + ": bad integer `" + s + "`");
    }
    return v;
}

}  // namespace arena
