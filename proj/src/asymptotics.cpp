#include "floquet/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "floquet/errors.hpp"
#include "floquet/parallel.hpp"

namespace floquet {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

PeriodicPotential normal_form_of(const PeriodicPotential& p, bool* normalized) {
  if (moments(p).normal_form) {
    *normalized = false;
    return p;
  }
  *normalized = true;
  return to_normal_form(p).potential;
}

// First tied pair in an ascending list, or {-1, -1}.
std::pair<int, int> find_tie(const Eigen::VectorXd& nu, double tol) {
  for (int j = 0; j + 1 < nu.size(); ++j)
    if (std::abs(nu(j + 1) - nu(j)) <= tol * std::max(1.0, std::abs(nu(j + 1)))) return {j, j + 1};
  return {-1, -1};
}

constexpr double kTieTol = 1e-10;

std::string tie_message(const Eigen::VectorXd& nu, std::pair<int, int> t) {
  std::ostringstream os;
  os << "nu_" << t.first + 1 << " = nu_" << t.second + 1 << " = " << nu(t.first) << " (eigenvalues of integral v v^* not distinct)";
  return os.str();
}

}  // namespace

AsymptoticsPrediction predict(const PeriodicPotential& p0, int n) {
  if (n == 0) throw InvalidInput("predict: cell index n must be nonzero");
  AsymptoticsPrediction out;
  out.n = n;
  const PeriodicPotential p = normal_form_of(p0, &out.normalized_first);
  const PotentialMoments mom = moments(p);
  const FourierData fd = fourier_data(p, n);
  out.nu = mom.nu;

  const CMatrix gamma = mom.calV + fd.gamma_part;
  const EigenSet es = eigenvalues(gamma);
  for (const cplx& v : es.values) {
    out.zeta.push_back(v.real());
    out.max_imag_zeta = std::max(out.max_imag_zeta, std::abs(v.imag()));
  }
  std::sort(out.zeta.begin(), out.zeta.end());
  if (out.max_imag_zeta > 1e-10) {
    std::ostringstream os;
    os << "predict: spectrum of calV - i J1 hat V'_" << n << " is not real (max |Im| = " << out.max_imag_zeta << ")";
    throw NumericalFailure(os.str());
  }
  const double pn = kPi * n;
  for (double z : out.zeta) out.predicted_eigenvalues.push_back(pn + z / (2.0 * pn));

  const auto nn = static_cast<int>(p.n());
  if (nn >= 2) {
    const auto tie = find_tie(mom.nu, kTieTol);
    if (tie.first >= 0) {
      out.omitted.push_back("resonance_pair, resonance_split: " + tie_message(mom.nu, tie));
    } else {
      // In normal form the basis of calV0 is the coordinate basis, so
      // nu(j) belongs to the coordinate carrying that diagonal entry.
      std::vector<int> order(nn);
      for (int j = 0; j < nn; ++j) order[j] = j;
      std::vector<double> diag(nn);
      for (int j = 0; j < nn; ++j) diag[j] = mom.calV0(j, j).real();
      std::sort(order.begin(), order.end(), [&](int a, int b) { return diag[a] < diag[b]; });
      for (int a = 0; a < nn; ++a) {
        for (int b = a + 1; b < nn; ++b) {
          ResonancePrediction r;
          r.j = a;
          r.k = b;
          const double s = mom.nu(a) + mom.nu(b);
          r.coupling = std::abs(fd.vhat_prime(order[a], order[b]));
          r.pair = pn + s / (4.0 * pn);
          r.split_minus = pn + (s / 2.0 - r.coupling) / (2.0 * pn);
          r.split_plus = pn + (s / 2.0 + r.coupling) / (2.0 * pn);
          out.predicted_resonances.push_back(r);
        }
      }
    }
  }
  return out;
}

cplx branch_shape(double nu, cplx z) { return std::cos(z - nu / (2.0 * z)); }

namespace {

void match_family(int n, const std::string& family, std::vector<double> predicted, std::vector<double> numeric,
                  std::vector<ResidualRow>& rows, std::vector<std::string>& notes) {
  std::sort(predicted.begin(), predicted.end());
  std::sort(numeric.begin(), numeric.end());
  const double n2 = static_cast<double>(n) * n;
  auto row = [&](double pr, double nu) {
    ResidualRow r;
    r.n = n;
    r.family = family;
    r.predicted = pr;
    r.numeric = nu;
    r.residual = std::isnan(nu) ? kNan : nu - pr;
    r.scaled = r.residual * n2;
    rows.push_back(r);
  };
  if (predicted.size() == numeric.size()) {
    for (std::size_t i = 0; i < predicted.size(); ++i) row(predicted[i], numeric[i]);
    return;
  }
  // Greedy nearest neighbour; leftovers on either side are reported.
  std::vector<bool> pu(predicted.size(), false), nu(numeric.size(), false);
  std::vector<std::pair<double, double>> pairs;
  for (;;) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t bi = 0, bj = 0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
      if (pu[i]) continue;
      for (std::size_t j = 0; j < numeric.size(); ++j) {
        if (nu[j]) continue;
        const double d = std::abs(predicted[i] - numeric[j]);
        if (d < best) {
          best = d;
          bi = i;
          bj = j;
        }
      }
    }
    if (!std::isfinite(best)) break;
    pu[bi] = nu[bj] = true;
    pairs.emplace_back(predicted[bi], numeric[bj]);
  }
  std::sort(pairs.begin(), pairs.end());
  for (const auto& [a, b] : pairs) row(a, b);
  for (std::size_t i = 0; i < predicted.size(); ++i)
    if (!pu[i]) row(predicted[i], kNan);
  for (std::size_t j = 0; j < numeric.size(); ++j) {
    if (nu[j]) continue;
    std::ostringstream os;
    os.precision(17);
    os << "n = " << n << ", " << family << ": unmatched numeric root " << numeric[j];
    notes.push_back(os.str());
  }
}

}  // namespace

ValidationReport validate(const PeriodicPotential& p0, int n_lo, int n_hi, double rtol, const RootOptions& opt) {
  if (n_lo < 2 || n_hi > 60 || n_lo > n_hi) throw InvalidInput("validate: n range must satisfy 2 <= n_lo <= n_hi <= 60");
  bool normalized = false;
  const PeriodicPotential p = normal_form_of(p0, &normalized);
  ValidationReport rep;
  rep.n_lo = n_lo;
  rep.n_hi = n_hi;
  if (normalized) rep.notes.push_back("potential was brought to normal form before predicting");

  const Window w{kPi * (n_lo - 0.5), kPi * (n_hi + 0.5)};
  const RealAxisScan scan = scan_real_axis(p, w, opt.grid_step, rtol, opt.jobs);
  const EigenvalueList per = eigenvalues_from_scan(p, scan, EigenKind::periodic, n_lo, n_hi, rtol, opt);
  const EigenvalueList ape = eigenvalues_from_scan(p, scan, EigenKind::antiperiodic, n_lo, n_hi, rtol, opt);
  std::optional<ResonanceList> res;
  if (p.n() >= 2) res = resonances_from_scan(p, scan, w, rtol, opt);
  if (res && res->identically_zero) rep.notes.push_back("discriminant vanishes identically; resonance families skipped");

  std::vector<std::string> omitted_seen;
  for (int n = n_lo; n <= n_hi; ++n) {
    const AsymptoticsPrediction pr = predict(p, n);
    for (const auto& o : pr.omitted)
      if (std::find(omitted_seen.begin(), omitted_seen.end(), o) == omitted_seen.end()) omitted_seen.push_back(o);

    const EigenvalueList& ev = (n % 2 == 0) ? per : ape;
    std::vector<double> numeric;
    for (const auto& r : ev.roots)
      if (r.cell == n)
        for (int m = 0; m < r.multiplicity; ++m) numeric.push_back(r.z);
    match_family(n, "eigenvalue", pr.predicted_eigenvalues, numeric, rep.rows, rep.notes);

    if (!res || res->identically_zero || pr.predicted_resonances.empty()) continue;
    std::vector<double> numeric_res;
    for (const auto& r : res->real_roots)
      if (r.cell == n)
        for (int m = 0; m < r.multiplicity; ++m) numeric_res.push_back(r.z);
    std::vector<double> pair, split;
    for (const auto& r : pr.predicted_resonances) {
      pair.push_back(r.pair);
      pair.push_back(r.pair);
      split.push_back(r.split_minus);
      split.push_back(r.split_plus);
    }
    match_family(n, "resonance_pair", pair, numeric_res, rep.rows, rep.notes);
    match_family(n, "resonance_split", split, numeric_res, rep.rows, rep.notes);
  }
  for (auto& o : omitted_seen) rep.notes.push_back("omitted " + o);
  if (res && !res->identically_zero && omitted_seen.empty())
    rep.notes.push_back("resonances compared on the real axis only; non-real resonances appear as unmatched predictions");

  const int len = n_hi - n_lo + 1;
  const int third = std::max(1, len / 3);
  for (const char* fam : {"eigenvalue", "resonance_pair", "resonance_split"}) {
    FamilySummary s;
    s.family = fam;
    bool any = false;
    for (const auto& r : rep.rows) {
      if (r.family != fam) continue;
      any = true;
      if (std::isnan(r.numeric)) {
        ++s.unmatched;
        continue;
      }
      ++s.matched;
      const double a = std::abs(r.scaled);
      s.max_scaled = std::max(s.max_scaled, a);
      if (r.n < n_lo + third) s.first_third_max = std::max(s.first_third_max, a);
      if (r.n > n_hi - third) s.last_third_max = std::max(s.last_third_max, a);
    }
    if (any) rep.summary.push_back(s);
  }
  return rep;
}

GapVerdict gap_criterion(const PeriodicPotential& p0) {
  GapVerdict g;
  bool normalized = false;
  const PeriodicPotential p = normal_form_of(p0, &normalized);
  const PotentialMoments mom = moments(p);
  g.nu = mom.nu;
  const auto tie = find_tie(mom.nu, kTieTol);
  if (tie.first >= 0) {
    g.refused = true;
    g.reason = tie_message(mom.nu, tie);
    return g;
  }
  const auto nn = static_cast<int>(p.n());
  for (int j = 0; j < nn; ++j) g.sums.push_back(mom.nu(j) + mom.nu(nn - 1 - j));
  bool equal = true;
  for (double s : g.sums)
    if (std::abs(s - g.sums.front()) > 1e-10 * std::max(1.0, std::abs(s))) equal = false;
  g.verdict = equal ? "infinite-gaps-possible" : "finitely-many-gaps-predicted";

  std::vector<int> order(nn);
  for (int j = 0; j < nn; ++j) order[j] = j;
  std::sort(order.begin(), order.end(), [&](int a, int b) { return mom.calV0(a, a).real() < mom.calV0(b, b).real(); });
  const int degree = std::max(p.degree(), 1);
  g.nondegenerate = true;
  for (int j = 0; j < nn; ++j) {
    const int k = nn - 1 - j;
    if (k < j) break;
    if (k == j) continue;
    AlphaEvidence e;
    e.j = j;
    e.k = k;
    e.all_nonzero = true;
    for (int n = 1; n <= degree; ++n) {
      const double c = std::abs(fourier_data(p, n).vhat_prime(order[j], order[k]));
      e.abs_coeffs.push_back(c);
      if (c <= 1e-14) {
        e.all_nonzero = false;
        e.ratios.push_back(std::numeric_limits<double>::infinity());
      } else {
        e.ratios.push_back((c * c + 1.0 / n) / c);
      }
    }
    g.nondegenerate = g.nondegenerate && e.all_nonzero;
    g.evidence.push_back(std::move(e));
  }
  if (g.evidence.empty()) g.nondegenerate = false;
  return g;
}

double lyapunov_exponent(cplx delta, double slack) {
  if (std::abs(delta.imag()) <= kRealTol && std::abs(delta.real()) <= 1.0 + slack) return 0.0;
  return std::abs(std::acos(delta).imag());
}

namespace {

// Candidates s * acos(delta) + 2 pi m on the physical sheet nearest to target.
cplx select_branch(cplx delta, cplx target) {
  cplx base = std::acos(delta);
  if (std::abs(delta.imag()) <= kRealTol && std::abs(delta.real()) <= 1.0) base = std::acos(delta.real());
  cplx best = base;
  double best_d = std::numeric_limits<double>::infinity();
  for (int s : {1, -1}) {
    cplx c = static_cast<double>(s) * base;
    if (c.imag() < -1e-12) continue;
    const double m = std::round((target.real() - c.real()) / (2.0 * kPi));
    for (int dm = -1; dm <= 1; ++dm) {
      const cplx cand = c + 2.0 * kPi * (m + dm);
      const double d = std::abs(cand - target);
      if (d < best_d) {
        best_d = d;
        best = cand;
      }
    }
  }
  return cplx(best.real(), std::abs(best.imag()));
}

}  // namespace

std::vector<QuasimomentumSample> quasimomentum(const PeriodicPotential& p, const std::vector<cplx>& contour,
                                               double rtol) {
  if (contour.empty()) throw InvalidInput("quasimomentum: empty contour");
  BranchTrack bt;
  if (contour.size() == 1) {
    bt.contour = contour;
    bt.values.push_back(sample(p, contour.front(), rtol).deltas);
  } else {
    bt = track(p, contour, rtol);
  }
  std::vector<bool> flagged(contour.size(), false);
  for (std::size_t c : bt.collision_cells) {
    flagged[c] = true;
    if (c + 1 < flagged.size()) flagged[c + 1] = true;
  }
  const std::size_t nb = p.n();
  std::vector<QuasimomentumSample> out;
  std::vector<cplx> prev;
  for (std::size_t i = 0; i < contour.size(); ++i) {
    QuasimomentumSample s;
    s.z = contour[i];
    s.flagged = flagged[i];
    for (std::size_t j = 0; j < nb; ++j) {
      // Anchor k ~ z at the first point; afterwards predict dk ~ dz.
      const cplx target = prev.empty() ? cplx(contour[i].real(), 0.0) : prev[j] + (contour[i] - contour[i - 1]);
      s.branches.push_back(select_branch(bt.values[i][j], target));
    }
    cplx sum = 0.0;
    double q = 0.0;
    for (std::size_t j = 0; j < nb; ++j) {
      sum += s.branches[j];
      q += lyapunov_exponent(bt.values[i][j]);
    }
    s.k = sum / static_cast<double>(nb);
    s.p = s.k.real();
    s.q = q / static_cast<double>(nb);
    prev = s.branches;
    out.push_back(std::move(s));
  }
  return out;
}

TraceReport trace_check(const PeriodicPotential& p, const std::vector<double>& heights, double rtol) {
  if (heights.size() < 4) throw InvalidInput("trace_check: at least 4 heights are required");
  for (double y : heights)
    if (!(y >= 10.0 && y <= 50.0)) throw InvalidInput("trace_check: heights must lie in [10, 50]");
  const PotentialMoments mom = moments(p);
  const double nn = static_cast<double>(p.n());
  TraceReport rep;
  rep.q0 = mom.h0 / (4.0 * nn);
  rep.q1 = mom.h1 / (8.0 * nn);
  rep.q2 = mom.h2 / (16.0 * nn);

  const std::vector<LyapunovSample> samples = parallel_map(heights.size(), 0, [&](std::size_t i) {
    return sample(p, cplx(0.0, heights[i]), rtol);
  });

  Eigen::MatrixXd a(2 * heights.size(), 3);
  Eigen::VectorXd b(2 * heights.size());
  for (std::size_t i = 0; i < heights.size(); ++i) {
    const double y = heights[i];
    const cplx z(0.0, y);
    const LyapunovSample& s = samples[i];
    if (!s.monodromy_valid) ++rep.invalid_monodromies;
    cplx ksum = 0.0, logdet = 0.0;
    for (const cplx& d : s.deltas) {
      cplx eta = d + std::sqrt(d * d - 1.0);
      if (std::abs(eta) < 1.0) eta = d - std::sqrt(d * d - 1.0);
      ksum += cplx(0.0, 1.0) * std::log(eta);
      logdet += 2.0 * std::log(d);
    }
    TraceRow row;
    row.y = y;
    row.k_minus_z = ksum / nn - z;
    row.log_det_l = logdet;
    const cplx z2 = 2.0 * z;
    row.predicted_log_det_l =
        -cplx(0.0, 1.0) * (2.0 * nn * z - mom.h0 / z2 - mom.h1 / (z2 * z2) - mom.h2 / (z2 * z2 * z2)) -
        2.0 * nn * std::log(2.0);
    cplx diff = row.log_det_l - row.predicted_log_det_l;
    diff.imag(std::remainder(diff.imag(), 2.0 * kPi));
    row.detl_defect = std::abs(diff);
    rep.detl_defect = std::max(rep.detl_defect, row.detl_defect);
    rep.rows.push_back(row);

    a.row(2 * i) << 0.0, 1.0 / (y * y), 0.0;
    b(2 * i) = row.k_minus_z.real();
    a.row(2 * i + 1) << 1.0 / y, 0.0, -1.0 / (y * y * y);
    b(2 * i + 1) = row.k_minus_z.imag();
  }

  // Column scaling keeps the condition number meaningful for the 1/y^3 column.
  Eigen::Vector3d scale = a.colwise().norm().transpose();
  for (int c = 0; c < 3; ++c)
    if (scale(c) == 0.0) scale(c) = 1.0;
  const Eigen::MatrixXd as = a * scale.cwiseInverse().asDiagonal();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(as, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  rep.condition = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1) : std::numeric_limits<double>::infinity();
  if (rep.condition <= 1e8) {
    const Eigen::Vector3d x = svd.solve(b).cwiseQuotient(scale);
    rep.fitted = true;
    rep.fitted_q0 = x(0);
    rep.fitted_q1 = x(1);
    rep.fitted_q2 = x(2);
  }
  return rep;
}

}  // namespace floquet
