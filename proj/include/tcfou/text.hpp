#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace tcfou {

std::vector<std::string_view> split(std::string_view text, char sep);
std::string_view trim(std::string_view text);

// Strict parses: the whole token must be consumed, otherwise ContractError
// naming `what`.
double parse_double_strict(std::string_view token, std::string_view what);
std::int64_t parse_int_strict(std::string_view token, std::string_view what);
std::uint64_t parse_uint_strict(std::string_view token, std::string_view what);

// Shortest representation that parses back to the same double.
std::string format_double(double value);

}  // namespace tcfou
