#include "floquet/roots.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>

#include <boost/math/tools/roots.hpp>
#include <boost/math/tools/toms748_solve.hpp>

namespace floquet {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class G>
double bracketed_root(G g, double a, double b, double ga, double gb, double xtol) {
  if (ga == 0.0) return a;
  if (gb == 0.0) return b;
  std::uintmax_t iters = 200;
  auto tol = [xtol](double x, double y) { return std::abs(y - x) <= xtol; };
  const auto r = boost::math::tools::toms748_solve(g, a, b, ga, gb, tol, iters);
  return 0.5 * (r.first + r.second);
}

bool positive(double x) { return x >= 0.0; }

}  // namespace

std::vector<RealRoot> real_roots(const std::vector<double>& grid, const std::vector<ValueSlope>& samples,
                                 const RealFunction& f, double half_cell, double xtol) {
  if (grid.size() != samples.size()) throw InvalidInput("real_roots: grid and samples differ in length");
  auto scale_at = [&](double x) {
    double s = 0.0;
    const auto lo = std::lower_bound(grid.begin(), grid.end(), x - half_cell);
    const auto hi = std::upper_bound(grid.begin(), grid.end(), x + half_cell);
    for (auto it = lo; it != hi; ++it) s = std::max(s, std::abs(samples[it - grid.begin()].f));
    return std::max(s, std::numeric_limits<double>::min());
  };
  auto value = [&](double x) { return f(x).f; };
  auto slope = [&](double x) { return f(x).df; };

  std::vector<RealRoot> found;
  auto add = [&](double x, bool contact, double fx) {
    const double scale = scale_at(x);
    found.push_back({x, contact ? 2 : 1, std::abs(fx) / scale, contact});
  };

  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    const double a = grid[i], b = grid[i + 1];
    const ValueSlope sa = samples[i], sb = samples[i + 1];
    if (positive(sa.f) != positive(sb.f)) {
      const double x = bracketed_root(value, a, b, sa.f, sb.f, xtol);
      add(x, false, value(x));
      continue;
    }
    const bool dips = positive(sa.f) ? (sa.df < 0.0 && sb.df >= 0.0) : (sa.df > 0.0 && sb.df <= 0.0);
    if (!dips) continue;
    const double xm = bracketed_root(slope, a, b, sa.df, sb.df, xtol);
    const double fm = value(xm);
    if (std::abs(fm) <= kContactThreshold * scale_at(xm)) {
      add(xm, true, fm);
    } else if (positive(fm) != positive(sa.f)) {
      const double x1 = bracketed_root(value, a, xm, sa.f, fm, xtol);
      const double x2 = bracketed_root(value, xm, b, fm, sb.f, xtol);
      add(x1, false, value(x1));
      add(x2, false, value(x2));
    }
  }

  std::sort(found.begin(), found.end(), [](const RealRoot& x, const RealRoot& y) { return x.z < y.z; });
  std::vector<RealRoot> merged;
  for (const RealRoot& r : found) {
    if (!merged.empty() && r.z - merged.back().z <= kMergeTol) {
      RealRoot& m = merged.back();
      if (r.residual < m.residual) {
        m.z = r.z;
        m.residual = r.residual;
      }
      m.multiplicity = std::max(m.multiplicity, r.multiplicity);
      m.contact = m.contact || r.contact;
    } else {
      merged.push_back(r);
    }
  }
  return merged;
}

Winding winding_number(const ComplexFunction& f, cplx center, double radius, int points, int max_points) {
  if (!(radius > 0.0) || points < 3) throw InvalidInput("winding_number: bad radius or point count");
  struct Node {
    double theta;
    cplx value;
  };
  std::vector<Node> nodes;
  for (int k = 0; k < points; ++k) {
    const double th = 2.0 * kPi * k / points;
    nodes.push_back({th, f(center + std::polar(radius, th))});
  }
  Winding w;
  w.evaluations = points;
  double total = 0.0;
  w.min_abs = kInf;
  std::size_t i = 0;
  while (i < nodes.size()) {
    const Node cur = nodes[i];
    const bool last = (i + 1 == nodes.size());
    const Node nxt = last ? Node{2.0 * kPi, nodes[0].value} : nodes[i + 1];
    w.min_abs = std::min(w.min_abs, std::abs(cur.value));
    if (cur.value == cplx(0.0) || nxt.value == cplx(0.0)) {
      w.reliable = false;
      ++i;
      continue;
    }
    const double step = std::arg(nxt.value / cur.value);
    if (std::abs(step) > kPi / 4.0 && w.evaluations < max_points) {
      const double th = 0.5 * (cur.theta + nxt.theta);
      nodes.insert(nodes.begin() + static_cast<std::ptrdiff_t>(i) + 1, Node{th, f(center + std::polar(radius, th))});
      ++w.evaluations;
      continue;
    }
    if (std::abs(step) > kPi / 4.0) w.reliable = false;
    total += step;
    ++i;
  }
  w.count = static_cast<int>(std::lround(total / (2.0 * kPi)));
  return w;
}

namespace {

// Roots of w^m - e1 w^{m-1} + e2 w^{m-2} - ... from power sums s_1..s_m.
std::vector<cplx> roots_from_power_sums(const std::vector<cplx>& s, int m) {
  std::vector<cplx> e(m + 1, cplx(0.0));
  e[0] = 1.0;
  for (int k = 1; k <= m; ++k) {
    cplx acc(0.0);
    for (int i = 1; i <= k; ++i) acc += ((i % 2 == 1) ? 1.0 : -1.0) * e[k - i] * s[i];
    e[k] = acc / static_cast<double>(k);
  }
  if (m == 1) return {e[1]};
  CMatrix comp = CMatrix::Zero(m, m);
  for (int k = 1; k < m; ++k) comp(k, k - 1) = 1.0;
  // w^m = e1 w^{m-1} - e2 w^{m-2} + ...
  for (int k = 1; k <= m; ++k) comp(0, k - 1) = ((k % 2 == 1) ? 1.0 : -1.0) * e[k];
  return eigenvalues(comp).values;
}

cplx newton_polish(const AnalyticFunction& f, cplx z) {
  auto [fz, dz] = f(z);
  for (int it = 0; it < 30; ++it) {
    if (dz == cplx(0.0)) break;
    const cplx step = fz / dz;
    const cplx cand = z - step;
    const auto [fc, dc] = f(cand);
    if (!(std::abs(fc) < std::abs(fz))) break;
    z = cand;
    fz = fc;
    dz = dc;
    if (std::abs(step) <= 1e-15 * (1.0 + std::abs(z))) break;
  }
  return z;
}

// A double root is a simple zero of f'; refine it by the secant rule on f'.
cplx double_root_polish(const AnalyticFunction& f, cplx z0, double h) {
  cplx za = z0, zb = z0 + h;
  cplx da = f(za).second, db = f(zb).second;
  for (int it = 0; it < 60; ++it) {
    if (db == da) break;
    const cplx zc = zb - db * (zb - za) / (db - da);
    za = zb;
    da = db;
    zb = zc;
    db = f(zb).second;
    if (std::abs(zb - za) <= 1e-14 * (1.0 + std::abs(zb))) break;
  }
  return std::abs(db) <= std::abs(da) ? zb : za;
}

}  // namespace

DiskRoots roots_in_disk(const AnalyticFunction& f, cplx center, double radius, int points) {
  if (!(radius > 0.0) || points < 16) throw InvalidInput("roots_in_disk: bad radius or point count");
  DiskRoots out;
  out.center = center;
  static constexpr double kFactors[] = {1.0, 1.01, 0.99, 1.02};
  std::vector<cplx> w(points), val(points), der(points);
  bool bad = true;
  for (int attempt = 0; attempt < 4 && bad; ++attempt) {
    out.nudges = attempt;
    out.radius = radius * kFactors[attempt];
    bad = false;
    for (int k = 0; k < points && !bad; ++k) {
      w[k] = std::polar(1.0, 2.0 * kPi * k / points);
      std::tie(val[k], der[k]) = f(center + out.radius * w[k]);
      if (val[k] == cplx(0.0) || !std::isfinite(std::abs(val[k])) || !std::isfinite(std::abs(der[k]))) bad = true;
      else if (der[k] != cplx(0.0) && std::abs(val[k] / der[k]) < 1e-4) bad = true;
    }
    for (int k = 0; k < points && !bad; ++k) {
      if (std::abs(std::arg(val[(k + 1) % points] / val[k])) > kPi / 2.0) bad = true;
    }
  }
  if (bad) {
    out.ok = false;
    out.failure = "a root stays within 1e-4 of the boundary after 3 nudges";
    return out;
  }

  double total = 0.0;
  for (int k = 0; k < points; ++k) {
    total += std::arg(val[(k + 1) % points] / val[k]);
    out.boundary_max = std::max(out.boundary_max, std::abs(val[k]));
  }
  out.count = static_cast<int>(std::lround(total / (2.0 * kPi)));
  if (out.count < 0) {
    out.ok = false;
    out.failure = "negative winding number (function has poles)";
    return out;
  }
  if (out.count == 0) return out;

  // s_k = (1 / 2 pi i) contour integral of w^k f'/f dz, with z = c + r w.
  std::vector<cplx> s(out.count + 1, cplx(0.0));
  for (int k = 0; k <= out.count; ++k) {
    cplx acc(0.0);
    for (int j = 0; j < points; ++j) acc += std::pow(w[j], k + 1) * der[j] / val[j];
    s[k] = acc * out.radius / static_cast<double>(points);
  }
  std::vector<cplx> est = roots_from_power_sums(s, out.count);
  for (cplx& x : est) x = center + out.radius * x;

  // Group estimates that sit on top of each other.
  const double cluster_tol = 1e-3 * out.radius;
  std::vector<int> group(est.size(), -1);
  int groups = 0;
  for (std::size_t a = 0; a < est.size(); ++a) {
    if (group[a] >= 0) continue;
    group[a] = groups;
    for (std::size_t b = a + 1; b < est.size(); ++b) {
      if (group[b] < 0 && std::abs(est[a] - est[b]) < cluster_tol) group[b] = groups;
    }
    ++groups;
  }
  int refined = 0;
  for (int g = 0; g < groups; ++g) {
    std::vector<cplx> members;
    for (std::size_t a = 0; a < est.size(); ++a) {
      if (group[a] == g) members.push_back(est[a]);
    }
    const cplx mean = std::accumulate(members.begin(), members.end(), cplx(0.0)) / static_cast<double>(members.size());
    if (members.size() == 1) {
      out.roots.emplace_back(newton_polish(f, mean), 1);
    } else if (members.size() == 2) {
      const cplx a = newton_polish(f, members[0]);
      const cplx b = newton_polish(f, members[1]);
      if (std::abs(a - b) > 1e-6 * (1.0 + std::abs(a))) {
        out.roots.emplace_back(a, 1);
        out.roots.emplace_back(b, 1);
      } else {
        out.roots.emplace_back(double_root_polish(f, mean, 1e-6 * out.radius), 2);
      }
    } else {
      out.roots.emplace_back(mean, static_cast<int>(members.size()));
    }
  }
  for (const auto& [z, m] : out.roots) {
    if (std::abs(z - center) < out.radius) refined += m;
  }
  std::sort(out.roots.begin(), out.roots.end(), [](const auto& x, const auto& y) {
    return x.first.real() != y.first.real() ? x.first.real() < y.first.real() : x.first.imag() < y.first.imag();
  });
  if (refined != out.count) {
    out.ok = false;
    out.failure = "winding count " + std::to_string(out.count) + " != refined roots " + std::to_string(refined);
  }
  return out;
}

}  // namespace floquet
