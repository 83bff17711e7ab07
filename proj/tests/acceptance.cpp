// Acceptance checks 1-10. Usage: acceptance [k ...]; no argument runs all.
// Prints one PASS/FAIL line per criterion; exit status 1 if any failed.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "floquet/asymptotics.hpp"
#include "floquet/casestudy.hpp"
#include "oracles.hpp"

using namespace floquet;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [" << what << "]";
    }
  }
};

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

PeriodicPotential cosine_potential() { return PeriodicPotential(1, {TrigPoly(1, {0.5, 0.0, 0.5})}); }

// 1. Free operator on [-10, 10].
void free_operator(Verdict& v) {
  const PeriodicPotential p = PeriodicPotential::zero(2);
  const SpectralReport r = scan_bands(p, {-10.0, 10.0});
  v.require(r.bands.size() == 1 && r.bands[0].lo == -10.0 && r.bands[0].hi == 10.0, "one band over the window");
  v.require(r.gaps.empty(), "no gaps");
  double worst = 0.0;
  for (const NodeSample& s : r.samples)
    for (const cplx& d : s.deltas) worst = std::max(worst, std::abs(d - std::cos(s.z)));
  v.require(worst <= 1e-10, "max |Delta - cos z| = " + num(worst));
  int roots = 0;
  for (EigenKind kind : {EigenKind::periodic, EigenKind::antiperiodic}) {
    for (const SpectralRoot& root : find_eigenvalues(p, kind, -3, 3).roots) {
      ++roots;
      v.require(std::abs(root.z - kPi * root.cell) <= 1e-8, "root " + num(root.z) + " off pi n");
      v.require(root.multiplicity == 4, "multiplicity at " + num(root.z));
    }
  }
  v.require(roots == 7, "7 roots at pi n, n = -3..3, found " + std::to_string(roots));
  v.detail << " max|Delta - cos z| = " << num(worst);
}

// 2. Constant potentials against the matrix exponential.
void constant_monodromy(Verdict& v) {
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0, oracle_gap = 0.0;
  for (int i = 0; i < 50; ++i) {
    const std::size_t n = 1 + i % 3;
    const PeriodicPotential p = oracle::random_constant(rng, n, 5.0 * u(rng));
    const cplx z = std::polar(10.0 * std::sqrt(u(rng)), 2.0 * kPi * u(rng));
    const CMatrix a = cplx(0.0, 1.0) * j1_matrix(n) * (z * CMatrix::Identity(2 * n, 2 * n) - p.V_at(0.0));
    const CMatrix closed = mat_exp(a);
    oracle_gap = std::max(oracle_gap, norm_op(closed - oracle::taylor_exp(a)) / norm_op(closed));
    worst = std::max(worst, norm_op(integrate(p, z, 1e-13).psi1 - closed));
  }
  v.require(worst <= 1e-9, "max error " + num(worst));
  v.require(oracle_gap <= 1e-12, "mat_exp vs Taylor oracle " + num(oracle_gap));
  v.detail << " max ||integrate - exp|| = " << num(worst);
}

// 3. Power series against the integrator.
void series_envelope(Verdict& v) {
  std::mt19937 rng(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst_ratio = 0.0;
  for (int i = 0; i < 20; ++i) {
    const double norm = 0.1 + 0.1 * u(rng);
    const PeriodicPotential p = oracle::random_potential(rng, 1 + i % 3, 1 + i % 2, norm * norm);
    const cplx z(20.0 * u(rng) - 10.0, 4.0 * u(rng) - 2.0);
    const SeriesResult s = series_psi(p, z, 6);
    const double err = norm_op(s.partial_sum - integrate(p, z, 1e-13).psi1);
    worst_ratio = std::max(worst_ratio, err / s.error_bound);
  }
  v.require(worst_ratio <= 1.0, "discrepancy / bound = " + num(worst_ratio));
  v.detail << " max discrepancy / bound = " << num(worst_ratio);
}

// 4. Structural identities.
void structure(Verdict& v) {
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double sym = 0.0, pal = 0.0, pair = 0.0;
  int branch_points = 0;
  for (int i = 0; i < 10; ++i) {
    const PeriodicPotential p = oracle::random_potential(rng, 1 + i % 3, 1 + i % 3, 0.5 + i);
    for (int k = 0; k < 40; ++k) {
      const cplx z(40.0 * u(rng) - 20.0, 6.0 * u(rng) - 3.0);
      const double ey = std::exp(std::abs(z.imag()));
      const MonodromyResult m = integrate(p, z);
      sym = std::max(sym, m.symplectic_defect / (ey * ey));
      const LyapunovSample s = sample_from(m);
      pal = std::max(pal, s.palindromy_residual);
      // Each eigenvalue of L is doubled unless the sample sits at a branch point.
      if (s.near_branch_point) ++branch_points;
      else pair = std::max(pair, s.pair_residual / ey);
    }
  }
  v.require(sym <= 1e-8, "symplectic defect / e^{2|Im z|} = " + num(sym));
  v.require(pal <= 1e-7, "palindromy " + num(pal));
  v.require(pair <= 1e-7, "L pair spread / e^{|Im z|} = " + num(pair));
  v.detail << " symplectic " << num(sym) << ", palindromy " << num(pal) << ", pair spread " << num(pair)
           << ", branch-point samples " << branch_points;
}

// 5. Unperturbed example, a = 1.
void unperturbed(Verdict& v) {
  const double a = 1.0;
  const PeriodicPotential p = PeriodicPotential::example_4x4(a, 0.0, 0.05);
  const UnperturbedReference ref(a);
  const ResonanceList res = find_resonances(p, Window{0.5, 26.0});
  double worst_r = 0.0;
  for (int n = 1; n <= 8; ++n) {
    double best = 1e300;
    for (const SpectralRoot& r : res.real_roots) best = std::min(best, std::abs(r.z - ref.resonance(n)));
    worst_r = std::max(worst_r, best);
  }
  v.require(worst_r <= 1e-7, "resonance error " + num(worst_r));

  double worst_e = 0.0;
  for (int n = 1; n <= 8; n += 2) {
    const EigenvalueList l = find_eigenvalues(p, EigenKind::antiperiodic, n, n);
    const double target = kPi * n * std::sqrt(1.0 + a * a / (kPi * kPi * n * n));
    double best = 1e300;
    for (const SpectralRoot& r : l.roots) best = std::min(best, std::abs(r.z - target));
    worst_e = std::max(worst_e, best);
  }
  v.require(worst_e <= 1e-8, "antiperiodic root error " + num(worst_e));
  const SpectralReport bands = scan_bands(p, {0.5, 26.0});
  v.require(bands.gaps.empty(), std::to_string(bands.gaps.size()) + " gaps on [0.5, 26]");
  v.detail << " resonance error " << num(worst_r) << ", antiperiodic error " << num(worst_e) << ", gaps "
           << bands.gaps.size();
}

// 6. Real/complex bifurcation at a = 7.
void bifurcation(Verdict& v) {
  CaseStudyConfig cfg;
  cfg.a = 7.0;
  cfg.nu = 0.05;
  cfg.tau_values = {0.0, 0.01, 0.02, 0.04};
  cfg.n_max = 3;
  cfg.jobs = 0;
  const auto recs = bifurcation_sweep(cfg);
  for (const BifurcationRecord& r : recs) {
    double prev_im = 0.0;
    for (const TauRoots& t : r.roots_by_tau) {
      if (t.tau == 0.0) continue;
      if (r.n == 1) {
        const bool conj = std::abs(t.minus - std::conj(t.plus)) <= 1e-7;
        const double im = std::abs(t.plus.imag());
        v.require(t.classification == "complex-pair" && conj && im > prev_im,
                  "n = 1, tau = " + num(t.tau) + ": " + t.classification);
        prev_im = im;
      } else {
        v.require(t.classification == "real-gap" && t.gap_verified,
                  "n = " + std::to_string(r.n) + ", tau = " + num(t.tau) + ": " + t.classification +
                      (t.gap_verified ? "" : ", gap not confirmed"));
      }
    }
  }
  const double radius = kPi * 3 + 1.0;
  std::vector<int> counts;
  for (double tau : {0.01, 0.02, 0.04}) {
    const DiskResult d = resonance_count(PeriodicPotential::example_4x4(cfg.a, tau, cfg.nu), radius);
    counts.push_back(d.count);
    v.require(d.count == 12, "rho roots in |z| < 3 pi + 1 at tau = " + num(tau) + ": " + std::to_string(d.count) +
                                 " (expected 12)");
  }
  v.detail << " counts";
  for (int c : counts) v.detail << " " << c;
}

// 7. Bounded scaled residuals over n = 3..25.
void residuals(Verdict& v) {
  RootOptions opt;
  opt.jobs = 0;
  constexpr double kBound = 1.0;
  for (const auto& [name, p] : std::vector<std::pair<std::string, PeriodicPotential>>{
           {"diag(1,2)", PeriodicPotential::diagonal({1.0, 2.0})}, {"cos", cosine_potential()}}) {
    const ValidationReport r = validate(p, 3, 25, kDefaultRtol, opt);
    for (const FamilySummary& f : r.summary) {
      if (f.matched == 0) continue;
      v.require(f.max_scaled <= kBound, name + " " + f.family + " max " + num(f.max_scaled));
      v.require(f.last_third_max <= 2.0 * f.first_third_max,
                name + " " + f.family + " trend " + num(f.last_third_max) + " vs " + num(f.first_third_max));
      v.detail << " " << name << "/" << f.family << " max " << num(f.max_scaled);
    }
    for (const std::string& note : r.notes)
      if (note.find("unmatched numeric root") != std::string::npos) v.require(false, name + ": " + note);
  }
}

// 8. Trace asymptotics.
void trace_formulas(Verdict& v) {
  const std::vector<double> heights{20, 25, 30, 35, 40};
  // Q0 by hand: tr of the mean of V^2 over the 2N x 2N system, divided by 4N.
  for (const auto& [name, p, expected] : std::vector<std::tuple<std::string, PeriodicPotential, double>>{
           {"zero", PeriodicPotential::zero(2), 0.0},
           {"constant a=1", PeriodicPotential::diagonal({1.0}), 0.5},
           {"example a=1", PeriodicPotential::example_4x4(1.0, 0.0, 0.05), 0.25}}) {
    const TraceReport t = trace_check(p, heights);
    v.require(std::abs(t.q0 - expected) <= 1e-14 * std::max(1.0, expected), name + ": Q0 closed form");
    v.require(t.fitted && std::abs(t.fitted_q0 - expected) <= std::max(0.01 * expected, 1e-8),
              name + ": fitted Q0 " + num(t.fitted_q0) + " vs " + num(expected));
    v.require(t.rows.back().y == 40.0 && t.rows.back().detl_defect < 1e-3,
              name + ": det L defect at y = 40 is " + num(t.rows.back().detl_defect));
    for (std::size_t i = 1; i < t.rows.size(); ++i)
      v.require(t.rows[i].detl_defect <= t.rows[i - 1].detl_defect + 1e-10, name + ": det L defect not decreasing");
    v.detail << " " << name << " Q0 " << num(t.fitted_q0) << "/" << num(expected) << " defect40 "
             << num(t.rows.back().detl_defect);
  }
}

// 9. Lyapunov exponent inequalities and the gap-length sum.
void exponent_bounds(Verdict& v) {
  std::mt19937 rng(5);
  const std::vector<std::tuple<std::string, PeriodicPotential, Window>> cases{
      {"zero", PeriodicPotential::zero(2), {-10.0, 10.0}},
      {"constant a=1", PeriodicPotential::diagonal({1.0}), {-4.0, 4.0}},
      {"diag(1,2)", PeriodicPotential::diagonal({1.0, 2.0}), {-2.0, 12.0}},
      {"cos", cosine_potential(), {-6.0, 6.0}},
      {"example a=1 tau=0.1", PeriodicPotential::example_4x4(1.0, 0.1, 0.1), {0.5, 12.0}},
      {"random N=3", oracle::random_potential(rng, 3, 2, 3.0), {-8.0, 8.0}},
      {"example a=7 tau=0.05", PeriodicPotential::example_4x4(7.0, 0.05, 0.05), {-40.0, 40.0}}};
  double worst_full = 0.0, worst_excess = -1e300;
  for (const auto& [name, p, w] : cases) {
    const SpectralReport r = scan_bands(p, w, kPi / 200.0, kDefaultRtol, 0);
    const double q0 = moments(p).h0 / (4.0 * static_cast<double>(p.n()));
    const int n = static_cast<int>(p.n());
    for (const NodeSample& s : r.samples) {
      double q = 0.0;
      for (const cplx& d : s.deltas) q += lyapunov_exponent(d, edge_slack(kDefaultRtol));
      q /= n;
      if (s.count == n) worst_full = std::max(worst_full, q);
      else worst_excess = std::max(worst_excess, q * q - 2.0 * q0);
    }
    const GapSum gs = gap_sum_check(r, p);
    v.require(gs.pass, name + ": gap sum " + num(gs.lhs) + " > " + num(gs.rhs));
    v.require(!r.flagged(), name + ": band scan flagged");
  }
  v.require(worst_full <= 1e-7, "q on full bands " + num(worst_full));
  v.require(worst_excess <= 1e-6, "q^2 - 2 Q0 " + num(worst_excess));
  v.detail << " max q on full bands " << num(worst_full) << ", max q^2 - 2 Q0 " << num(worst_excess);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// 10. Identical CLI runs give identical bytes.
void determinism(Verdict& v) {
  const fs::path dir = fs::temp_directory_path() / "floquet_acceptance_10";
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::ofstream(dir / "run.cfg") << "command = bands\nbuiltin = example_4x4\na = 1\ntau = 0.1\nnu = 0.1\n"
                                    "window = 0.5 8\n";
  for (const char* out : {"a", "b"}) {
    const std::string cmd = std::string(FLOQUET_CLI) + " --config " + (dir / "run.cfg").string() + " --out " +
                            (dir / out).string() + " > /dev/null 2>&1";
    v.require(std::system(cmd.c_str()) == 0, std::string("run ") + out + " exit status");
  }
  int files = 0;
  for (const auto& e : fs::directory_iterator(dir / "a")) {
    ++files;
    const fs::path other = dir / "b" / e.path().filename();
    v.require(fs::exists(other) && slurp(e.path()) == slurp(other), e.path().filename().string() + " differs");
  }
  v.require(files >= 3, "expected at least 3 output files");
  v.detail << " " << files << " files compared";
}

const std::vector<std::pair<std::string, std::function<void(Verdict&)>>> kCriteria{
    {"free operator exactness", free_operator},
    {"constant-potential monodromy", constant_monodromy},
    {"series versus integrator", series_envelope},
    {"structural identities", structure},
    {"unperturbed example, a = 1", unperturbed},
    {"bifurcation and resonance count, a = 7", bifurcation},
    {"scaled residuals bounded", residuals},
    {"trace asymptotics", trace_formulas},
    {"exponent inequalities and gap sum", exponent_bounds},
    {"CLI determinism", determinism},
};

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> which;
  for (int i = 1; i < argc; ++i) which.push_back(std::atoi(argv[i]));
  if (which.empty())
    for (int k = 1; k <= 10; ++k) which.push_back(k);
  bool all = true;
  for (int k : which) {
    if (k < 1 || k > 10) {
      std::cerr << "unknown criterion " << k << "\n";
      return 2;
    }
    Verdict v;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      kCriteria[k - 1].second(v);
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail << " exception: " << e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << "criterion " << k << " " << (v.pass ? "PASS" : "FAIL") << ": " << kCriteria[k - 1].first << ";"
              << v.detail.str() << " (" << num(secs) << " s)" << std::endl;
    all = all && v.pass;
  }
  return all ? 0 : 1;
}
