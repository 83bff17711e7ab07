#include "floquet/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace floquet {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool by_re_im(cplx a, cplx b) {
  if (a.real() != b.real()) return a.real() < b.real();
  return a.imag() < b.imag();
}

// Greedy: repeatedly join the closest remaining pair under the cost.
template <class Cost>
std::vector<std::pair<std::size_t, std::size_t>> greedy_pairs(std::size_t count, Cost cost) {
  std::vector<bool> used(count, false);
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t round = 0; round < count / 2; ++round) {
    double best = kInf;
    bool have = false;
    std::pair<std::size_t, std::size_t> pick{0, 0};
    for (std::size_t a = 0; a < count; ++a) {
      if (used[a]) continue;
      for (std::size_t b = a + 1; b < count; ++b) {
        if (used[b]) continue;
        const double c = cost(a, b);
        if (!have || c < best) {
          have = true;
          best = c;
          pick = {a, b};
        }
      }
    }
    used[pick.first] = used[pick.second] = true;
    pairs.push_back(pick);
  }
  return pairs;
}

}  // namespace

CMatrix lyapunov_matrix(const CMatrix& psi) {
  const auto n = static_cast<std::size_t>(psi.rows() / 2);
  const CMatrix j = j_matrix(n);
  return 0.5 * (psi - j * psi.transpose() * j);
}

LyapunovSample sample_from(const MonodromyResult& m) {
  const CMatrix& psi = m.psi1;
  const std::size_t dim = static_cast<std::size_t>(psi.rows());
  const std::size_t n = dim / 2;
  LyapunovSample s;
  s.z = m.z;
  s.monodromy_valid = m.valid;

  const std::vector<cplx> tau = eigenvalues(psi).values;
  const auto mp = greedy_pairs(dim, [&](std::size_t a, std::size_t b) { return std::abs(tau[a] * tau[b] - 1.0); });
  for (const auto& [a, b] : mp) {
    cplx big = tau[a], small = tau[b];
    if (std::abs(small) > std::abs(big)) std::swap(big, small);
    s.multipliers.emplace_back(big, small);
    s.palindromy_residual = std::max(s.palindromy_residual, std::abs(big * small - 1.0));
  }
  std::sort(s.multipliers.begin(), s.multipliers.end(),
            [](const auto& x, const auto& y) { return by_re_im(x.first, y.first); });
  s.pairing_ok = s.palindromy_residual <= 1e-6;

  const std::vector<cplx> lv = eigenvalues(lyapunov_matrix(psi)).values;
  const auto lp = greedy_pairs(dim, [&](std::size_t a, std::size_t b) { return std::abs(lv[a] - lv[b]); });
  for (const auto& [a, b] : lp) {
    s.deltas.push_back(0.5 * (lv[a] + lv[b]));
    s.pair_residual = std::max(s.pair_residual, std::abs(lv[a] - lv[b]));
  }
  std::sort(s.deltas.begin(), s.deltas.end(), by_re_im);

  s.cluster_margin = kInf;
  s.rho = 1.0;
  double dmax = 1.0;
  for (std::size_t a = 0; a < n; ++a) {
    dmax = std::max(dmax, std::abs(s.deltas[a]));
    for (std::size_t b = a + 1; b < n; ++b) {
      const cplx d = s.deltas[a] - s.deltas[b];
      s.cluster_margin = std::min(s.cluster_margin, std::abs(d));
      s.rho *= d * d;
    }
  }
  s.near_branch_point = n > 1 && s.cluster_margin < kCollisionTol * dmax;

  // Each multiplier pair should reproduce one Delta.
  std::vector<bool> taken(n, false);
  for (const auto& [big, small] : s.multipliers) {
    const cplx d = 0.5 * (big + 1.0 / big);
    double best = kInf;
    std::size_t pick = 0;
    for (std::size_t a = 0; a < n; ++a) {
      if (!taken[a] && std::abs(s.deltas[a] - d) < best) {
        best = std::abs(s.deltas[a] - d);
        pick = a;
      }
    }
    taken[pick] = true;
    s.delta_multiplier_residual = std::max(s.delta_multiplier_residual, best);
  }
  return s;
}

LyapunovSample sample(const PeriodicPotential& p, cplx z, double rtol) {
  return sample_from(integrate(p, z, rtol));
}

cplx rho_n2_from(const CMatrix& psi) {
  if (psi.rows() != 4) throw InvalidInput("rho_n2: requires N = 2");
  const auto [t1, t2] = traces_from(psi);
  return (t2.value + 4.0) / 2.0 - t1.value * t1.value / 4.0;
}

cplx rho_n2(const PeriodicPotential& p, cplx z, double rtol) {
  if (p.n() != 2) throw InvalidInput("rho_n2: requires N = 2");
  return rho_n2_from(integrate(p, z, rtol).psi1);
}

namespace {

cplx det_replacing(const CMatrix& h, const CMatrix& dh) {
  cplx total(0.0);
  for (Eigen::Index c = 0; c < h.cols(); ++c) {
    CMatrix m = h;
    m.col(c) = dh.col(c);
    total += Eigen::PartialPivLU<CMatrix>(m).determinant();
  }
  return total;
}

DiscriminantValue hankel(const CMatrix& psi, const CMatrix* dpsi) {
  const Eigen::Index n = psi.rows() / 2;
  if (n == 1) return {1.0, 0.0};
  const auto un = static_cast<std::size_t>(n);
  const CMatrix j = j_matrix(un);
  const CMatrix l = lyapunov_matrix(psi);
  CMatrix dl;
  if (dpsi) dl = 0.5 * (*dpsi - j * dpsi->transpose() * j);

  const Eigen::Index top = 2 * n - 2;
  std::vector<cplx> s(top + 1), ds(top + 1, cplx(0.0));
  CMatrix power = CMatrix::Identity(2 * n, 2 * n);  // L^{m-1} while computing s_m
  s[0] = static_cast<double>(n);
  for (Eigen::Index m = 1; m <= top; ++m) {
    if (dpsi) ds[m] = 0.5 * static_cast<double>(m) * (power * dl).trace();
    power = (power * l).eval();
    s[m] = 0.5 * power.trace();
  }
  CMatrix h(n, n), dh(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = 0; b < n; ++b) {
      h(a, b) = s[a + b];
      dh(a, b) = ds[a + b];
    }
  }
  const cplx value = Eigen::PartialPivLU<CMatrix>(h).determinant();
  return {value, dpsi ? det_replacing(h, dh) : cplx(0.0)};
}

}  // namespace

cplx discriminant(const CMatrix& psi) { return hankel(psi, nullptr).value; }

DiscriminantValue discriminant(const CMatrix& psi, const CMatrix& dpsi) { return hankel(psi, &dpsi); }

// --- branch tracking ---------------------------------------------------------

namespace {

double min_pair_distance(const std::vector<cplx>& v) {
  double d = kInf;
  for (std::size_t a = 0; a < v.size(); ++a) {
    for (std::size_t b = a + 1; b < v.size(); ++b) d = std::min(d, std::abs(v[a] - v[b]));
  }
  return d;
}

struct Match {
  std::vector<cplx> values;
  bool ambiguous = false;
};

Match match(const std::vector<cplx>& predicted, const std::vector<cplx>& candidates) {
  const std::size_t n = predicted.size();
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = kInf, second = kInf;
  std::vector<std::size_t> best_perm = perm;
  if (n <= 6) {
    do {
      double c = 0.0;
      for (std::size_t k = 0; k < n; ++k) c += std::abs(predicted[k] - candidates[perm[k]]);
      if (c < best) {
        second = best;
        best = c;
        best_perm = perm;
      } else if (c < second) {
        second = c;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
  } else {
    std::vector<bool> used(n, false);
    best = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      double d = kInf;
      for (std::size_t c = 0; c < n; ++c) {
        if (!used[c] && std::abs(predicted[k] - candidates[c]) < d) {
          d = std::abs(predicted[k] - candidates[c]);
          best_perm[k] = c;
        }
      }
      used[best_perm[k]] = true;
      best += d;
    }
  }
  Match m;
  for (std::size_t k = 0; k < n; ++k) m.values.push_back(candidates[best_perm[k]]);
  m.ambiguous = n > 1 && (second <= 3.0 * best + 1e-12 || min_pair_distance(candidates) <= kCollisionTol);
  return m;
}

struct Tracker {
  const PeriodicPotential& p;
  double rtol;
  std::size_t subdivisions = 0;

  // Returns branch values at zb continuing va (with slope dva) from za;
  // sets collided when the assignment stays ambiguous.
  std::vector<cplx> advance(cplx za, const std::vector<cplx>& va, const std::vector<cplx>& slope, cplx zb,
                            const std::vector<cplx>& cand_b, int depth, bool& collided) {
    std::vector<cplx> pred(va.size());
    for (std::size_t k = 0; k < va.size(); ++k) pred[k] = va[k] + slope[k] * (zb - za);
    Match m = match(pred, cand_b);
    if (!m.ambiguous) return m.values;
    if (depth >= kMaxSubdivisions) {
      collided = true;
      return m.values;
    }
    const cplx zm = 0.5 * (za + zb);
    const std::vector<cplx> cand_m = sample(p, zm, rtol).deltas;
    ++subdivisions;
    if (min_pair_distance(cand_b) <= kCollisionTol && min_pair_distance(cand_m) <= kCollisionTol &&
        min_pair_distance(va) <= kCollisionTol) {
      // Coincident branches across the whole cell: no subdivision can separate them.
      collided = true;
      return m.values;
    }
    const std::vector<cplx> vm = advance(za, va, slope, zm, cand_m, depth + 1, collided);
    std::vector<cplx> slope_m(va.size());
    for (std::size_t k = 0; k < va.size(); ++k) slope_m[k] = (vm[k] - va[k]) / (zm - za);
    return advance(zm, vm, slope_m, zb, cand_b, depth + 1, collided);
  }
};

}  // namespace

BranchTrack track(const PeriodicPotential& p, const std::vector<cplx>& contour, double rtol) {
  if (contour.size() < 2) throw InvalidInput("track: contour needs at least two points");
  BranchTrack out;
  out.contour = contour;
  std::vector<std::vector<cplx>> cands;
  for (const cplx z : contour) cands.push_back(sample(p, z, rtol).deltas);

  Tracker tracker{p, rtol};
  const std::size_t n = p.n();
  out.values.push_back(cands[0]);
  std::vector<cplx> slope(n, cplx(0.0));
  for (std::size_t i = 1; i < contour.size(); ++i) {
    bool collided = false;
    std::vector<cplx> next =
        tracker.advance(contour[i - 1], out.values.back(), slope, contour[i], cands[i], 0, collided);
    if (collided) out.collision_cells.push_back(i - 1);
    for (std::size_t k = 0; k < n; ++k) slope[k] = (next[k] - out.values.back()[k]) / (contour[i] - contour[i - 1]);
    if (collided) std::fill(slope.begin(), slope.end(), cplx(0.0));
    out.values.push_back(std::move(next));
  }
  out.subdivisions = tracker.subdivisions;
  return out;
}

}  // namespace floquet
