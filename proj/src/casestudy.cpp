#include "floquet/casestudy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "floquet/errors.hpp"
#include "floquet/parallel.hpp"
#include "floquet/text.hpp"

namespace floquet {

void check_config(const CaseStudyConfig& cfg) {
  if (!(cfg.a > 0.0) || !std::isfinite(cfg.a)) throw InvalidInput("casestudy: a must be positive");
  const double x = cfg.a / (2.0 * kPi);
  if (std::abs(x - std::round(x)) < 1e-3) throw InvalidInput("casestudy: a / 2pi must stay at least 1e-3 away from an integer");
  if (!(cfg.nu >= 0.02 && cfg.nu <= 0.2)) throw InvalidInput("casestudy: nu must lie in [0.02, 0.2]");
  if (cfg.tau_values.empty()) throw InvalidInput("casestudy: tau_values is empty");
  bool has_zero = false;
  for (double t : cfg.tau_values) {
    if (!(std::abs(t) <= 0.2)) throw InvalidInput("casestudy: every tau must satisfy |tau| <= 0.2");
    if (t == 0.0) has_zero = true;
  }
  if (!has_zero) throw InvalidInput("casestudy: tau_values must include 0 for anchoring");
  if (cfg.n_max < 1 || cfg.n_max > 12) throw InvalidInput("casestudy: n_max must lie in [1, 12]");
}

UnperturbedReference::UnperturbedReference(double a) : a_(a) {
  if (!(a > 0.0)) throw InvalidInput("unperturbed_reference: a must be positive");
}

cplx UnperturbedReference::k(cplx z) const {
  // Branch with k ~ z for large |z|; cos k is even so either branch gives Delta.
  cplx r = std::sqrt(z * z - a_ * a_);
  if ((r * std::conj(z)).real() < 0.0) r = -r;
  return r;
}

cplx UnperturbedReference::delta1(cplx z) const { return std::cos(k(z)); }
cplx UnperturbedReference::delta2(cplx z) const { return std::cos(z); }

cplx UnperturbedReference::rho(cplx z) const {
  const cplx d = delta1(z) - delta2(z);
  return d * d;
}

cplx UnperturbedReference::trace(int m, cplx z) const {
  return 2.0 * std::cos(static_cast<double>(m) * k(z)) + 2.0 * std::cos(static_cast<double>(m) * z);
}

double UnperturbedReference::resonance(int n) const {
  if (n == 0) throw InvalidInput("unperturbed_reference: resonance index must be nonzero");
  return kPi * n + a_ * a_ / (4.0 * kPi * n);
}

std::vector<double> UnperturbedReference::resonances_within(double radius) const {
  std::vector<double> out;
  for (int n = 1;; ++n) {
    const double r = resonance(n);
    if (kPi * n > radius) break;
    if (r < radius) {
      out.insert(out.end(), {-r, -r, r, r});
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<UnperturbedReference::Root> UnperturbedReference::eigenvalues_within(double radius) const {
  std::vector<Root> out;
  auto kind_of = [](int n) { return (n % 2 == 0) ? EigenKind::periodic : EigenKind::antiperiodic; };
  for (int n = -static_cast<int>(radius / kPi) - 1; n <= static_cast<int>(radius / kPi) + 1; ++n) {
    const double z = kPi * n;
    if (std::abs(z) < radius) out.push_back({z, 2, kind_of(n)});
  }
  for (int m = 0;; ++m) {
    const double z = std::sqrt(kPi * kPi * m * m + a_ * a_);
    if (z >= radius) break;
    const int mult = m == 0 ? 1 : 2;
    out.push_back({z, mult, kind_of(m)});
    out.push_back({-z, mult, kind_of(m)});
  }
  std::sort(out.begin(), out.end(), [](const Root& x, const Root& y) { return x.z < y.z; });
  return out;
}

int UnperturbedReference::eigenvalue_count_within(double radius) const {
  int c = 0;
  for (const Root& r : eigenvalues_within(radius)) c += r.multiplicity;
  return c;
}

namespace {

double disk_radius(const UnperturbedReference& ref, int n) {
  double half = std::numeric_limits<double>::infinity();
  if (n > 1) half = std::min(half, 0.5 * (ref.resonance(n) - ref.resonance(n - 1)));
  half = std::min(half, 0.5 * std::abs(ref.resonance(n + 1) - ref.resonance(n)));
  return std::min(0.3, std::abs(half));
}

TauRoots solve_tau(const CaseStudyConfig& cfg, int n, double tau, double radius, double rtol) {
  const UnperturbedReference ref(cfg.a);
  const PeriodicPotential p = PeriodicPotential::example_4x4(cfg.a, tau, cfg.nu);
  TauRoots t;
  t.tau = tau;
  const DiskResult dr = find_resonances(p, Disk{cplx(ref.resonance(n), 0.0), radius}, rtol);
  t.winding_count = dr.count;
  t.radius_used = dr.radius_used;
  std::vector<cplx> zs;
  for (const auto& r : dr.roots)
    for (int m = 0; m < r.multiplicity; ++m) zs.push_back(r.z);
  if (!dr.ok || dr.count != 2 || zs.size() != 2) {
    t.classification = "flagged";
    std::ostringstream os;
    os << "winding count " << dr.count << " in disk of radius " << dr.radius_used;
    if (!dr.failure.empty()) os << "; " << dr.failure;
    t.note = os.str();
    if (zs.size() == 2) {
      t.minus = zs[0];
      t.plus = zs[1];
    }
    return t;
  }
  const double tol = 1e-7;
  if (std::abs(zs[0].imag()) <= tol && std::abs(zs[1].imag()) <= tol) {
    t.classification = "real-gap";
    t.minus = zs[0].real();
    t.plus = zs[1].real();
    if (t.plus.real() < t.minus.real()) std::swap(t.minus, t.plus);
  } else if (std::abs(zs[0] - std::conj(zs[1])) <= tol) {
    t.classification = "complex-pair";
    t.minus = zs[0].imag() < 0.0 ? zs[0] : zs[1];
    t.plus = zs[0].imag() < 0.0 ? zs[1] : zs[0];
  } else {
    t.classification = "flagged";
    t.minus = zs[0];
    t.plus = zs[1];
    t.note = "roots neither real nor conjugate within 1e-7";
    return t;
  }

  const double width = t.plus.real() - t.minus.real();
  if (t.classification == "real-gap" && width > 1e-6) {
    t.gap_checked = true;
    const double margin = std::max(0.02, width);
    const double step = std::min(kPi / 200.0, width / 4.0);
    const SpectralReport rep =
        scan_bands(p, Window{t.minus.real() - margin, t.plus.real() + margin}, step, rtol, 1);
    for (const Gap& g : rep.gaps) {
      if (g.lo <= t.minus.real() + 1e-6 && g.hi >= t.plus.real() - 1e-6 && !g.truncated) t.gap_verified = true;
    }
    if (!t.gap_verified) t.note = "interval between the real roots is not a gap of scan_bands";
  }
  return t;
}

}  // namespace

std::vector<BifurcationRecord> bifurcation_sweep(const CaseStudyConfig& cfg, double rtol) {
  check_config(cfg);
  const UnperturbedReference ref(cfg.a);
  const std::size_t nt = cfg.tau_values.size();
  const std::size_t jobs = static_cast<std::size_t>(cfg.n_max) * nt;
  const std::vector<TauRoots> solved = parallel_map(jobs, cfg.jobs, [&](std::size_t k) {
    const int n = static_cast<int>(k / nt) + 1;
    return solve_tau(cfg, n, cfg.tau_values[k % nt], disk_radius(ref, n), rtol);
  });

  std::vector<BifurcationRecord> out;
  for (int n = 1; n <= cfg.n_max; ++n) {
    BifurcationRecord rec;
    rec.n = n;
    rec.r0 = ref.resonance(n);
    rec.disk_radius = disk_radius(ref, n);
    for (std::size_t i = 0; i < nt; ++i) rec.roots_by_tau.push_back(solved[(n - 1) * nt + i]);

    std::vector<const TauRoots*> nonzero;
    for (const auto& t : rec.roots_by_tau) {
      if (t.classification == "flagged") rec.flagged = true;
      if (t.classification == "real-gap" && t.gap_checked && !t.gap_verified) rec.flagged = true;
      if (t.tau != 0.0) nonzero.push_back(&t);
    }
    std::string cls;
    for (const TauRoots* t : nonzero) {
      if (cls.empty()) cls = t->classification;
      else if (cls != t->classification) cls = "mixed";
    }
    rec.classification = rec.flagged ? "flagged" : (cls.empty() ? "real-gap" : cls);

    std::vector<const TauRoots*> by_size = nonzero;
    std::sort(by_size.begin(), by_size.end(),
              [](const TauRoots* x, const TauRoots* y) { return std::abs(x->tau) < std::abs(y->tau); });
    double sum = 0.0;
    int used = 0;
    for (const TauRoots* t : by_size) {
      if (used == 2) break;
      if (t->classification == "flagged") continue;
      sum += std::abs(t->plus - t->minus) / (2.0 * std::abs(t->tau));
      ++used;
    }
    rec.slope_estimate = used > 0 ? sum / used : std::numeric_limits<double>::quiet_NaN();
    out.push_back(std::move(rec));
  }
  return out;
}

namespace {

struct Located {
  double z;
  EigenKind kind;
};

std::vector<Located> numeric_eigenvalues(const PeriodicPotential& p, int n_max, double rtol, unsigned jobs) {
  RootOptions opt;
  opt.jobs = jobs;
  const RealAxisScan scan = scan_real_axis(p, Window{-kPi * 0.5, kPi * (n_max + 0.5)}, opt.grid_step, rtol, jobs);
  std::vector<Located> out;
  for (EigenKind kind : {EigenKind::periodic, EigenKind::antiperiodic}) {
    const EigenvalueList ev = eigenvalues_from_scan(p, scan, kind, 0, n_max, rtol, opt);
    for (const auto& r : ev.roots)
      for (int m = 0; m < r.multiplicity; ++m) out.push_back({r.z, kind});
  }
  return out;
}

}  // namespace

StabilityReport eigenvalue_stability(const CaseStudyConfig& cfg, double rtol) {
  check_config(cfg);
  StabilityReport rep;
  const UnperturbedReference ref(cfg.a);
  rep.count_radius = kPi * cfg.n_max + 1.0;
  rep.reference_count = ref.eigenvalue_count_within(rep.count_radius);

  std::vector<double> taus = cfg.tau_values;
  std::sort(taus.begin(), taus.end(), [](double x, double y) { return std::abs(x) < std::abs(y); });
  const auto base = numeric_eigenvalues(PeriodicPotential::example_4x4(cfg.a, 0.0, cfg.nu), cfg.n_max, rtol, cfg.jobs);

  for (double tau : taus) {
    const PeriodicPotential p = PeriodicPotential::example_4x4(cfg.a, tau, cfg.nu);
    StabilityRow row;
    row.tau = tau;
    const auto cur = tau == 0.0 ? base : numeric_eigenvalues(p, cfg.n_max, rtol, cfg.jobs);
    for (EigenKind kind : {EigenKind::periodic, EigenKind::antiperiodic}) {
      std::vector<double> a, b;
      for (const auto& l : base)
        if (l.kind == kind) a.push_back(l.z);
      for (const auto& l : cur)
        if (l.kind == kind) b.push_back(l.z);
      std::sort(a.begin(), a.end());
      std::sort(b.begin(), b.end());
      if (a.size() == b.size()) {
        for (std::size_t i = 0; i < a.size(); ++i) row.max_displacement = std::max(row.max_displacement, std::abs(a[i] - b[i]));
        row.matched += static_cast<int>(a.size());
        continue;
      }
      std::vector<bool> used(b.size(), false);
      for (double x : a) {
        std::size_t best = b.size();
        for (std::size_t j = 0; j < b.size(); ++j)
          if (!used[j] && (best == b.size() || std::abs(b[j] - x) < std::abs(b[best] - x))) best = j;
        if (best == b.size()) {
          row.unmatched.push_back(to_string(kind) + " reference root " + fmt_double(x) + " has no partner");
          continue;
        }
        used[best] = true;
        ++row.matched;
        row.max_displacement = std::max(row.max_displacement, std::abs(b[best] - x));
      }
      for (std::size_t j = 0; j < b.size(); ++j)
        if (!used[j]) row.unmatched.push_back(to_string(kind) + " root " + fmt_double(b[j]) + " has no partner");
    }

    const auto f = [&](cplx z) {
      const CMatrix psi = integrate(p, z, rtol).psi1;
      const CMatrix eye = CMatrix::Identity(psi.rows(), psi.cols());
      return Eigen::PartialPivLU<CMatrix>(psi - eye).determinant() * Eigen::PartialPivLU<CMatrix>(psi + eye).determinant();
    };
    const Winding w = winding_number(f, cplx(0.0), rep.count_radius, 512, 8192);
    rep.counts.push_back(w.reliable ? w.count : -1);
    rep.rows.push_back(std::move(row));
  }
  for (std::size_t i = 1; i < rep.rows.size(); ++i)
    if (rep.rows[i].max_displacement + 1e-12 < rep.rows[i - 1].max_displacement) rep.monotone = false;
  return rep;
}

DiskResult resonance_count(const PeriodicPotential& p, double radius, double rtol) {
  return find_resonances(p, Disk{cplx(0.0), radius}, rtol);
}

std::string bifurcation_csv(const CaseStudyConfig& cfg, const std::vector<BifurcationRecord>& records) {
  std::ostringstream os;
  os << "a,nu,n,tau,re_minus,im_minus,re_plus,im_plus,classification,slope\n";
  for (const auto& rec : records) {
    for (const auto& t : rec.roots_by_tau) {
      os << fmt_double(cfg.a) << ',' << fmt_double(cfg.nu) << ',' << rec.n << ',' << fmt_double(t.tau) << ','
         << fmt_double(t.minus.real()) << ',' << fmt_double(t.minus.imag()) << ',' << fmt_double(t.plus.real()) << ','
         << fmt_double(t.plus.imag()) << ',' << t.classification << ',' << fmt_double(rec.slope_estimate) << '\n';
    }
  }
  return os.str();
}

std::string trajectory_csv(const std::vector<BifurcationRecord>& records) {
  std::ostringstream os;
  os << "n,tau,branch,re,im\n";
  for (const auto& rec : records) {
    for (const auto& t : rec.roots_by_tau) {
      os << rec.n << ',' << fmt_double(t.tau) << ",minus," << fmt_double(t.minus.real()) << ','
         << fmt_double(t.minus.imag()) << '\n';
      os << rec.n << ',' << fmt_double(t.tau) << ",plus," << fmt_double(t.plus.real()) << ','
         << fmt_double(t.plus.imag()) << '\n';
    }
  }
  return os.str();
}

}  // namespace floquet
