#include "tcfou/text.hpp"

#include <charconv>
#include <cmath>
#include <system_error>

#include "tcfou/errors.hpp"

namespace tcfou {

std::vector<std::string_view> split(std::string_view text, char sep) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        const auto pos = text.find(sep, start);
        if (pos == std::string_view::npos) {
            parts.push_back(text.substr(start));
            return parts;
        }
        parts.push_back(text.substr(start, pos - start));
        start = pos + 1;
    }
}

std::string_view trim(std::string_view text) {
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = text.find_last_not_of(" \t\r\n");
    return text.substr(first, last - first + 1);
}

namespace {

template <class T>
T parse_strict(std::string_view token, std::string_view what, const char* kind) {
    T value{};
    const char* begin = token.data();
    const char* end = token.data() + token.size();
    if (!token.empty() && token.front() == '+') ++begin;
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (token.empty() || ec != std::errc() || ptr != end)
        throw ContractError(std::string(what) + ": expected " + kind + ", got '" + std::string(token) + "'");
    return value;
}

}  // namespace

double parse_double_strict(std::string_view token, std::string_view what) {
    const double v = parse_strict<double>(token, what, "a real number");
    if (!std::isfinite(v)) throw ContractError(std::string(what) + ": value must be finite");
    return v;
}

std::int64_t parse_int_strict(std::string_view token, std::string_view what) {
    return parse_strict<std::int64_t>(token, what, "an integer");
}

std::uint64_t parse_uint_strict(std::string_view token, std::string_view what) {
    return parse_strict<std::uint64_t>(token, what, "a non-negative integer");
}

std::string format_double(double value) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    if (ec != std::errc()) return std::to_string(value);
    return {buf, ptr};
}

}  // namespace tcfou
