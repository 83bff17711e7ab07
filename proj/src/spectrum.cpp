#include "floquet/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

#include <boost/math/tools/toms748_solve.hpp>

#include "floquet/parallel.hpp"

namespace floquet {

namespace {

struct DetWithSlope {
  cplx value;
  cplx slope;
};

DetWithSlope det_and_slope(const CMatrix& a, const CMatrix& da) {
  DetWithSlope out{Eigen::PartialPivLU<CMatrix>(a).determinant(), 0.0};
  for (Eigen::Index c = 0; c < a.cols(); ++c) {
    CMatrix m = a;
    m.col(c) = da.col(c);
    out.slope += Eigen::PartialPivLU<CMatrix>(m).determinant();
  }
  return out;
}

double sigma(EigenKind k) { return k == EigenKind::periodic ? 1.0 : -1.0; }

std::vector<double> make_grid(Window w, double step) {
  if (!(w.hi > w.lo) || !std::isfinite(w.lo) || !std::isfinite(w.hi)) {
    throw InvalidInput("window must satisfy lo < hi");
  }
  if (!(step > 0.0)) throw InvalidInput("grid step must be positive");
  const auto n = static_cast<std::size_t>(std::ceil((w.hi - w.lo) / step - 1e-9));
  std::vector<double> g(n + 1);
  for (std::size_t k = 0; k <= n; ++k) g[k] = w.lo + (w.hi - w.lo) * static_cast<double>(k) / static_cast<double>(n);
  return g;
}

int cell_of(double z) { return static_cast<int>(std::lround(z / kPi)); }

}  // namespace

std::string to_string(EigenKind k) { return k == EigenKind::periodic ? "periodic" : "antiperiodic"; }

RealAxisNode eval_real_axis(const PeriodicPotential& p, double z, double rtol) {
  const MonodromyDerivative d = integrate_with_derivative(p, z, rtol);
  const CMatrix& psi = d.result.psi1;
  const CMatrix eye = CMatrix::Identity(psi.rows(), psi.cols());
  const DetWithSlope per = det_and_slope(psi - eye, d.dpsi1);
  const DetWithSlope anti = det_and_slope(psi + eye, d.dpsi1);
  const DiscriminantValue disc = discriminant(psi, d.dpsi1);
  RealAxisNode out;
  out.z = z;
  out.periodic = {per.value.real(), per.slope.real()};
  out.antiperiodic = {anti.value.real(), anti.slope.real()};
  out.rho = {disc.value.real(), disc.derivative.real()};
  out.imag_periodic = per.value.imag();
  out.imag_antiperiodic = anti.value.imag();
  out.imag_rho = disc.value.imag();
  return out;
}

RealAxisScan scan_real_axis(const PeriodicPotential& p, Window w, double step, double rtol, unsigned jobs) {
  RealAxisScan scan;
  scan.grid = make_grid(w, step);
  scan.nodes = parallel_map(scan.grid.size(), jobs, [&](std::size_t k) { return eval_real_axis(p, scan.grid[k], rtol); });
  return scan;
}

namespace {

using Pick = ValueSlope RealAxisNode::*;

struct Extracted {
  std::vector<RealRoot> roots;
  double max_imag_ratio = 0.0;
  double max_abs = 0.0;
};

Extracted extract(const PeriodicPotential& p, const RealAxisScan& scan, Pick pick, double RealAxisNode::*imag,
                  double rtol) {
  Extracted out;
  std::vector<ValueSlope> samples;
  for (const auto& node : scan.nodes) {
    samples.push_back(node.*pick);
    out.max_abs = std::max(out.max_abs, std::abs((node.*pick).f));
  }
  for (const auto& node : scan.nodes) {
    out.max_imag_ratio = std::max(out.max_imag_ratio, std::abs(node.*imag) / std::max(out.max_abs, 1e-300));
  }
  const RealFunction f = [&](double z) { return eval_real_axis(p, z, rtol).*pick; };
  out.roots = real_roots(scan.grid, samples, f, kPi / 2.0);
  return out;
}

// Multiplicity from the argument principle on a small circle around each root.
// A circle holding more zeros than were found on the grid (two close double
// roots, say) is resolved with the disk solver.
void verify_multiplicities(std::vector<SpectralRoot>& roots, const AnalyticFunction& f) {
  const auto value = [&](cplx z) { return f(z).first; };
  std::vector<SpectralRoot> out;
  for (std::size_t k = 0; k < roots.size(); ++k) {
    double gap = std::numeric_limits<double>::infinity();
    if (k > 0) gap = std::min(gap, roots[k].z - roots[k - 1].z);
    if (k + 1 < roots.size()) gap = std::min(gap, roots[k + 1].z - roots[k].z);
    const double r = std::min(0.05, 0.4 * gap);
    const Winding w = winding_number(value, roots[k].z, r);
    if (w.reliable && w.count > roots[k].multiplicity) {
      const DiskRoots dr = roots_in_disk(f, roots[k].z, r);
      if (dr.ok && dr.count == w.count) {
        for (const auto& [z, m] : dr.roots) {
          if (std::abs(z.imag()) > 1e-6 * std::max(1.0, std::abs(z))) continue;
          SpectralRoot s = roots[k];
          s.z = z.real();
          s.multiplicity = m;
          s.cell = cell_of(s.z);
          s.residual = std::abs(f(z).first) / std::max(dr.boundary_max, 1e-300);
          s.contact = m % 2 == 0;
          s.winding_checked = true;
          out.push_back(s);
        }
        continue;
      }
    }
    if (w.reliable && w.count >= 1) {
      roots[k].multiplicity = w.count;
      roots[k].winding_checked = true;
    }
    out.push_back(roots[k]);
  }
  std::sort(out.begin(), out.end(), [](const SpectralRoot& a, const SpectralRoot& b) { return a.z < b.z; });
  roots = std::move(out);
}

AnalyticFunction eigen_function_with_slope(const PeriodicPotential& p, EigenKind kind, double rtol) {
  return [&p, kind, rtol](cplx z) {
    const MonodromyDerivative d = integrate_with_derivative(p, z, rtol);
    const CMatrix& psi = d.result.psi1;
    const DetWithSlope v = det_and_slope(psi - sigma(kind) * CMatrix::Identity(psi.rows(), psi.cols()), d.dpsi1);
    return std::make_pair(v.value, v.slope);
  };
}

AnalyticFunction discriminant_with_slope(const PeriodicPotential& p, double rtol) {
  return [&p, rtol](cplx z) {
    const MonodromyDerivative d = integrate_with_derivative(p, z, rtol);
    const DiscriminantValue v = discriminant(d.result.psi1, d.dpsi1);
    return std::make_pair(v.value, v.derivative);
  };
}

}  // namespace

EigenvalueList eigenvalues_from_scan(const PeriodicPotential& p, const RealAxisScan& scan, EigenKind kind,
                                     int n_lo, int n_hi, double rtol, const RootOptions& opt) {
  EigenvalueList out;
  out.kind = kind;
  out.n_lo = n_lo;
  out.n_hi = n_hi;
  const Extracted ex = kind == EigenKind::periodic
                           ? extract(p, scan, &RealAxisNode::periodic, &RealAxisNode::imag_periodic, rtol)
                           : extract(p, scan, &RealAxisNode::antiperiodic, &RealAxisNode::imag_antiperiodic, rtol);
  out.max_imag_ratio = ex.max_imag_ratio;
  out.imag_consistent = ex.max_imag_ratio <= 1e-8;
  const double lo = kPi * (n_lo - 0.5), hi = kPi * (n_hi + 0.5);
  for (const RealRoot& r : ex.roots) {
    if (r.z <= lo || r.z >= hi) continue;
    out.roots.push_back({r.z, r.multiplicity, r.residual, cell_of(r.z), r.contact, false});
  }
  if (opt.verify_multiplicity) {
    verify_multiplicities(out.roots, eigen_function_with_slope(p, kind, rtol));
  }
  for (int n = n_lo; n <= n_hi; ++n) {
    int count = 0;
    for (const auto& r : out.roots) {
      if (r.cell == n) count += r.multiplicity;
    }
    if (count > static_cast<int>(2 * p.n())) out.flagged_cells.push_back(n);
  }
  return out;
}

EigenvalueList find_eigenvalues(const PeriodicPotential& p, EigenKind kind, int n_lo, int n_hi, double rtol,
                                const RootOptions& opt) {
  if (n_lo > n_hi) throw InvalidInput("find_eigenvalues: n_range must satisfy lo <= hi");
  if (std::abs(n_lo) > 100000 || std::abs(n_hi) > 100000) throw InvalidInput("find_eigenvalues: n_range too large");
  const RealAxisScan scan = scan_real_axis(p, {kPi * (n_lo - 0.5), kPi * (n_hi + 0.5)}, opt.grid_step, rtol, opt.jobs);
  return eigenvalues_from_scan(p, scan, kind, n_lo, n_hi, rtol, opt);
}

ResonanceList resonances_from_scan(const PeriodicPotential& p, const RealAxisScan& scan, Window w, double rtol,
                                   const RootOptions& opt) {
  ResonanceList out;
  out.window = w;
  if (p.n() == 1) return out;
  const Extracted ex = extract(p, scan, &RealAxisNode::rho, &RealAxisNode::imag_rho, rtol);
  out.max_imag_ratio = ex.max_imag_ratio;
  if (ex.max_abs < 1e-13) {
    out.identically_zero = true;
    return out;
  }
  if (ex.max_imag_ratio > 1e-8) out.flags.push_back("discriminant has a non-negligible imaginary part on the real axis");
  for (const RealRoot& r : ex.roots) {
    if (r.z <= w.lo || r.z >= w.hi) continue;
    out.real_roots.push_back({r.z, r.multiplicity, r.residual, cell_of(r.z), r.contact, false});
  }
  if (opt.verify_multiplicity) {
    verify_multiplicities(out.real_roots, discriminant_with_slope(p, rtol));
  }
  for (const auto& r : out.real_roots) {
    if (r.residual > 1e-8) out.flags.push_back("resonance at " + std::to_string(r.z) + " has residual above 1e-8");
  }
  return out;
}

ResonanceList find_resonances(const PeriodicPotential& p, Window w, double rtol, const RootOptions& opt) {
  const RealAxisScan scan = scan_real_axis(p, w, opt.grid_step, rtol, opt.jobs);
  return resonances_from_scan(p, scan, w, rtol, opt);
}

DiskResult find_resonances(const PeriodicPotential& p, Disk d, double rtol) {
  if (!(d.radius > 0.0)) throw InvalidInput("find_resonances: disk radius must be positive");
  DiskResult out;
  out.requested = d;
  if (p.n() == 1) {
    out.radius_used = d.radius;
    return out;
  }
  const AnalyticFunction f = [&](cplx z) {
    const MonodromyDerivative m = integrate_with_derivative(p, z, rtol);
    const DiscriminantValue v = discriminant(m.result.psi1, m.dpsi1);
    return std::make_pair(v.value, v.derivative);
  };
  const DiskRoots dr = roots_in_disk(f, d.center, d.radius);
  out.radius_used = dr.radius;
  out.count = dr.count;
  out.ok = dr.ok;
  out.failure = dr.failure;
  for (const auto& [z, m] : dr.roots) {
    const double res = std::abs(f(z).first) / std::max(dr.boundary_max, 1e-300);
    out.roots.push_back({z, m, res});
  }
  return out;
}

// --- bands -------------------------------------------------------------------

int spectral_count(const std::vector<cplx>& deltas, double slack) {
  int c = 0;
  for (const cplx d : deltas) {
    if (std::abs(d.imag()) <= kRealTol && std::abs(d.real()) <= 1.0 + slack) ++c;
  }
  return c;
}

namespace {

struct Boundary {
  double z;
  int left;
  int right;
};

std::vector<Boundary> locate_boundaries(const PeriodicPotential& p, double a, int ca, double b, int cb, double rtol) {
  std::vector<Boundary> out;
  while (ca != cb) {
    double lo = a, hi = b;
    int chi = cb;
    while (hi - lo > kEdgeWidth) {
      const double mid = 0.5 * (lo + hi);
      const int cm = spectral_count(sample(p, mid, rtol).deltas, edge_slack(rtol));
      if (cm == ca) {
        lo = mid;
      } else {
        hi = mid;
        chi = cm;
      }
    }
    out.push_back({0.5 * (lo + hi), ca, chi});
    a = hi;
    ca = chi;
  }
  return out;
}

struct DefiningFunction {
  const char* kind;
  std::function<double(const std::vector<cplx>&)> from_deltas;
};

double det_minus_from(const std::vector<cplx>& d, double s) {
  cplx v = 1.0;
  for (const cplx x : d) v *= 2.0 * (1.0 - s * x);
  return v.real();
}

double rho_from(const std::vector<cplx>& d) {
  cplx v = 1.0;
  for (std::size_t a = 0; a < d.size(); ++a) {
    for (std::size_t b = a + 1; b < d.size(); ++b) v *= (d[a] - d[b]) * (d[a] - d[b]);
  }
  return v.real();
}

Endpoint classify(const PeriodicPotential& p, double z, const SpectralReport& rep, double rtol) {
  Endpoint e;
  e.z = z;
  const double delta = 1e-6;
  // Direct evaluations from psi keep the sign information exact near a root.
  auto evaluate = [&](double x) {
    const CMatrix psi = integrate(p, x, rtol).psi1;
    const CMatrix eye = CMatrix::Identity(psi.rows(), psi.cols());
    return std::array<double, 3>{Eigen::PartialPivLU<CMatrix>(psi - eye).determinant().real(),
                                 Eigen::PartialPivLU<CMatrix>(psi + eye).determinant().real(),
                                 discriminant(psi).real()};
  };
  static const char* kinds[3] = {"periodic", "antiperiodic", "resonance"};
  const auto fa = evaluate(z - delta), fb = evaluate(z + delta);
  for (int k = 0; k < 3; ++k) {
    if (k == 2 && p.n() == 1) continue;
    if ((fa[k] >= 0.0) == (fb[k] >= 0.0)) continue;
    double scale = std::numeric_limits<double>::min();
    for (const auto& s : rep.samples) {
      if (std::abs(s.z - z) > kPi / 2.0) continue;
      const double v = k == 0 ? det_minus_from(s.deltas, 1.0) : k == 1 ? det_minus_from(s.deltas, -1.0) : rho_from(s.deltas);
      scale = std::max(scale, std::abs(v));
    }
    auto g = [&](double x) { return evaluate(x)[k]; };
    std::uintmax_t iters = 100;
    auto tol = [](double x, double y) { return std::abs(y - x) <= 1e-13; };
    const auto r = boost::math::tools::toms748_solve(g, z - delta, z + delta, fa[k], fb[k], tol, iters);
    const double root = 0.5 * (r.first + r.second);
    e.labels.push_back({kinds[k], root, std::abs(g(root)) / scale});
  }
  return e;
}

}  // namespace

SpectralReport scan_bands(const PeriodicPotential& p, Window w, double grid_step, double rtol, unsigned jobs) {
  if (!(grid_step > 0.0) || grid_step > kPi / 200.0 + 1e-15) throw InvalidInput("scan_bands: grid_step must lie in (0, pi/200]");
  SpectralReport rep;
  rep.window = w;
  rep.grid_step = grid_step;
  rep.rtol = rtol;
  const std::vector<double> grid = make_grid(w, grid_step);
  const auto samples = parallel_map(grid.size(), jobs, [&](std::size_t k) { return sample(p, grid[k], rtol); });
  for (std::size_t k = 0; k < grid.size(); ++k) {
    rep.samples.push_back({grid[k], samples[k].deltas, samples[k].rho, spectral_count(samples[k].deltas, edge_slack(rtol))});
  }

  std::vector<Boundary> cuts;
  for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
    if (rep.samples[k].count == rep.samples[k + 1].count) continue;
    auto found = locate_boundaries(p, grid[k], rep.samples[k].count, grid[k + 1], rep.samples[k + 1].count, rtol);
    cuts.insert(cuts.end(), found.begin(), found.end());
  }
  double start = w.lo;
  int count = rep.samples.front().count;
  for (const Boundary& b : cuts) {
    rep.segments.push_back({start, b.z, count});
    start = b.z;
    count = b.right;
  }
  rep.segments.push_back({start, w.hi, count});

  for (const Segment& s : rep.segments) {
    if (s.count > 0) {
      if (!rep.bands.empty() && rep.bands.back().hi == s.lo) {
        rep.bands.back().hi = s.hi;
        rep.bands.back().profile.push_back(s);
      } else {
        rep.bands.push_back({s.lo, s.hi, {s}});
      }
      continue;
    }
    Gap g;
    g.lo = s.lo;
    g.hi = s.hi;
    g.truncated = s.lo == w.lo || s.hi == w.hi;
    const LyapunovSample mid = sample(p, 0.5 * (s.lo + s.hi), rtol);
    const bool all_real = std::all_of(mid.deltas.begin(), mid.deltas.end(),
                                      [](cplx d) { return std::abs(d.imag()) <= kRealTol; });
    g.type = all_real ? "stable" : "resonance";
    for (Endpoint* e : {&g.lower, &g.upper}) {
      const double z = (e == &g.lower) ? s.lo : s.hi;
      if (z == w.lo || z == w.hi) {
        e->z = z;
        e->window_edge = true;
        continue;
      }
      *e = classify(p, z, rep, rtol);
      if (e->labels.empty()) {
        rep.flags.push_back("unclassified gap endpoint at " + std::to_string(z));
      }
      for (const auto& l : e->labels) {
        if (l.residual > 1e-8) rep.flags.push_back("endpoint " + std::to_string(z) + " label residual above 1e-8");
      }
    }
    rep.gaps.push_back(std::move(g));
  }
  return rep;
}

GapSum gap_sum_check(const SpectralReport& report, const PeriodicPotential& p) {
  GapSum g;
  for (const Gap& gap : report.gaps) g.lhs += (gap.hi - gap.lo) * (gap.hi - gap.lo);
  g.rhs = 4.0 * p.norm2() / static_cast<double>(p.n());
  g.pass = g.lhs <= g.rhs;
  g.margin = g.rhs - g.lhs;
  return g;
}

}  // namespace floquet
