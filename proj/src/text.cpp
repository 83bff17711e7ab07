#include "floquet/text.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <sstream>

#include "floquet/errors.hpp"

namespace floquet {

std::string fmt_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  std::array<char, 64> buf{};
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), res.ptr);
}

double parse_double(std::string_view s, std::string_view what) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double x = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), x);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw InvalidInput(std::string(what) + ": cannot parse number '" + std::string(s) + "'");
  }
  return x;
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<KeyValue> parse_key_values(const std::string& text, const std::string& source) {
  std::vector<KeyValue> out;
  std::istringstream in(text);
  std::string line;
  int no = 0;
  while (std::getline(in, line)) {
    ++no;
    std::string_view v = line;
    if (auto h = v.find('#'); h != std::string_view::npos) v = v.substr(0, h);
    v = trim(v);
    if (v.empty()) continue;
    const auto eq = v.find('=');
    if (eq == std::string_view::npos) {
      throw InvalidInput(source + ":" + std::to_string(no) + ": expected 'key = value'");
    }
    KeyValue kv{std::string(trim(v.substr(0, eq))), std::string(trim(v.substr(eq + 1))), no};
    if (kv.key.empty()) throw InvalidInput(source + ":" + std::to_string(no) + ": empty key");
    out.push_back(std::move(kv));
  }
  return out;
}

}  // namespace floquet
