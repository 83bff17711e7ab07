#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "floquet/potential.hpp"
#include "floquet/text.hpp"

namespace floquet {

namespace {

// A value list is a sequence of plain numbers and parenthesised tuples,
// e.g. "1 2.5" or "(0, 1.0, 0.0) (1, 0.5, -0.25)".
std::vector<std::vector<double>> parse_tuples(std::string_view s, const std::string& what) {
  std::vector<std::vector<double>> out;
  std::size_t i = 0;
  auto skip = [&] {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == ',')) ++i;
  };
  for (skip(); i < s.size(); skip()) {
    if (s[i] == '(') {
      const auto close = s.find(')', i);
      if (close == std::string_view::npos) throw InvalidInput(what + ": unbalanced '('");
      std::vector<double> tuple;
      std::string_view inner = s.substr(i + 1, close - i - 1);
      std::size_t start = 0;
      while (start <= inner.size()) {
        const auto comma = inner.find(',', start);
        const auto piece = inner.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                                 : comma - start);
        tuple.push_back(parse_double(piece, what));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
      }
      out.push_back(std::move(tuple));
      i = close + 1;
    } else {
      const auto end = s.find_first_of(" \t,(", i);
      const auto piece = s.substr(i, end == std::string_view::npos ? std::string_view::npos : end - i);
      out.push_back({parse_double(piece, what)});
      i = (end == std::string_view::npos) ? s.size() : end;
    }
  }
  return out;
}

bool parse_entry_key(const std::string& key, std::size_t& j, std::size_t& k) {
  // v[j][k], 1-based
  if (key.size() < 7 || key[0] != 'v' || key[1] != '[') return false;
  const auto mid = key.find("][");
  if (mid == std::string::npos || key.back() != ']') return false;
  try {
    const int a = std::stoi(key.substr(2, mid - 2));
    const int b = std::stoi(key.substr(mid + 2, key.size() - mid - 3));
    if (a < 1 || b < 1) return false;
    j = static_cast<std::size_t>(a - 1);
    k = static_cast<std::size_t>(b - 1);
    return true;
  } catch (const std::exception&) {
    return false;
  }
}

}  // namespace

PeriodicPotential parse_potential(const std::string& text, const std::string& source) {
  const auto kvs = parse_key_values(text, source);
  std::map<std::string, std::string> scalars;
  std::map<std::pair<std::size_t, std::size_t>, TrigPoly> entries;
  for (const auto& kv : kvs) {
    const std::string where = source + ":" + std::to_string(kv.line);
    std::size_t j = 0, k = 0;
    if (parse_entry_key(kv.key, j, k)) {
      TrigPoly poly;
      for (const auto& t : parse_tuples(kv.value, where)) {
        if (t.size() != 3) throw InvalidInput(where + ": coefficient must be (m, re, im)");
        const double m = t[0];
        if (m != std::floor(m) || std::abs(m) > 100000) throw InvalidInput(where + ": bad frequency");
        poly.set_coeff(static_cast<int>(m), cplx(t[1], t[2]));
      }
      if (!entries.emplace(std::make_pair(j, k), poly).second) {
        throw InvalidInput(where + ": duplicate entry " + kv.key);
      }
    } else {
      if (!scalars.emplace(kv.key, kv.value).second) throw InvalidInput(where + ": duplicate key " + kv.key);
    }
  }

  auto number = [&](const std::string& key) -> double {
    auto it = scalars.find(key);
    if (it == scalars.end()) throw InvalidInput(source + ": missing '" + key + "'");
    return parse_double(it->second, source + ": " + key);
  };

  const std::string builtin = scalars.count("builtin") ? scalars.at("builtin") : "";
  if (builtin == "example_4x4") {
    return PeriodicPotential::example_4x4(number("a"), number("tau"), number("nu"));
  }
  const double nd = number("N");
  if (nd < 1 || nd != std::floor(nd) || nd > 64) throw InvalidInput(source + ": N must be an integer in [1, 64]");
  const auto n = static_cast<std::size_t>(nd);
  if (builtin == "zero") return PeriodicPotential::zero(n);
  if (builtin == "diagonal") {
    std::vector<cplx> d;
    auto it = scalars.find("values");
    if (it == scalars.end()) throw InvalidInput(source + ": diagonal needs 'values'");
    for (const auto& t : parse_tuples(it->second, source + ": values")) {
      if (t.size() == 1) d.emplace_back(t[0], 0.0);
      else if (t.size() == 2) d.emplace_back(t[0], t[1]);
      else throw InvalidInput(source + ": values entries must be re or (re, im)");
    }
    if (d.size() != n) throw InvalidInput(source + ": diagonal needs exactly N values");
    return PeriodicPotential::diagonal(d);
  }
  if (!builtin.empty()) throw InvalidInput(source + ": unknown builtin '" + builtin + "'");

  std::vector<TrigPoly> table(n * n);
  std::set<std::pair<std::size_t, std::size_t>> given;
  for (const auto& [jk, poly] : entries) {
    const auto [j, k] = jk;
    if (j >= n || k >= n) throw InvalidInput(source + ": entry index outside N");
    table[j * n + k] = poly;
    given.insert(jk);
  }
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = j + 1; k < n; ++k) {
      const bool a = given.count({j, k}) > 0, b = given.count({k, j}) > 0;
      if (a && !b) table[k * n + j] = table[j * n + k];
      if (b && !a) table[j * n + k] = table[k * n + j];
    }
  }
  return PeriodicPotential(n, std::move(table));
}

PeriodicPotential read_potential(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open potential file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_potential(ss.str(), path);
}

std::string format_potential(const PeriodicPotential& p) {
  std::ostringstream out;
  const auto& origin = p.origin();
  if (origin.builtin == "example_4x4") {
    out << "builtin = example_4x4\n";
    for (const auto& [k, v] : origin.params) out << k << " = " << fmt_double(v) << "\n";
    return out.str();
  }
  out << "N = " << p.n() << "\n";
  for (std::size_t j = 0; j < p.n(); ++j) {
    for (std::size_t k = j; k < p.n(); ++k) {
      const TrigPoly& e = p.entry(j, k);
      if (e.is_zero()) continue;
      out << "v[" << j + 1 << "][" << k + 1 << "] =";
      for (int m = -e.degree(); m <= e.degree(); ++m) {
        const cplx c = e.coeff(m);
        if (c == cplx(0.0)) continue;
        out << " (" << m << ", " << fmt_double(c.real()) << ", " << fmt_double(c.imag()) << ")";
      }
      out << "\n";
    }
  }
  return out.str();
}

void write_potential(const PeriodicPotential& p, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write potential file '" + path + "'");
  out << format_potential(p);
}

}  // namespace floquet
