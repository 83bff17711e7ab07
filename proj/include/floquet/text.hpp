#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace floquet {

/// Shortest decimal form that parses back to the same double.
std::string fmt_double(double x);

/// Strict double parse; throws InvalidInput naming `what` on failure.
double parse_double(std::string_view s, std::string_view what);

std::string_view trim(std::string_view s);

/// Splits "key = value" lines, dropping blanks and '#' comments.
struct KeyValue {
  std::string key;
  std::string value;
  int line = 0;
};
std::vector<KeyValue> parse_key_values(const std::string& text, const std::string& source);

}  // namespace floquet
