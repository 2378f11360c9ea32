#pragma once

#include <charconv>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace mcseg::detail {

/// Shortest decimal representation that round-trips the exact double.
inline std::string format_double(double v) {
    char buf[40];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{}) throw std::runtime_error("double formatting failed");
    return std::string(buf, end);
}

inline double parse_double(std::string_view s, const char* what = nullptr) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw std::runtime_error(std::string(what ? what : "value") + ": not a number: '" +
                                 std::string(s) + "'");
    return v;
}

inline std::int64_t parse_int(std::string_view s, const char* what = nullptr) {
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw std::runtime_error(std::string(what ? what : "value") + ": not an integer: '" +
                                 std::string(s) + "'");
    return v;
}

/// Split one CSV line on commas. Fields are plain (no quoting); the writers
/// never emit commas inside fields.
inline std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            out.emplace_back(line.substr(start));
            break;
        }
        out.emplace_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

}  // namespace mcseg::detail
