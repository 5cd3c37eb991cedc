#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace urbanrl {

/// Shortest round-trip decimal representation ('.' separator, locale-free).
std::string format_double(double v);

/// Strict parse of a full token; throws IoError on trailing garbage or empty input.
double parse_double(std::string_view token, const std::string& context);
long long parse_int(std::string_view token, const std::string& context);

std::string_view trim(std::string_view s);
std::vector<std::string_view> split(std::string_view s, char sep);

} // namespace urbanrl
