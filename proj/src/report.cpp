#include "floquet/report.hpp"

#include <cmath>
#include <sstream>

#include "floquet/text.hpp"

namespace floquet {

namespace {

// Non-finite numbers become null so every report stays valid JSON.
Json num(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

std::string labels(const Endpoint& e) {
  std::string s;
  for (const auto& l : e.labels) s += (s.empty() ? "" : "|") + l.kind;
  return e.window_edge ? "window-edge" : s;
}

Json endpoint_json(const Endpoint& e) {
  Json j;
  j["z"] = num(e.z);
  j["window_edge"] = e.window_edge;
  Json ls = Json::array();
  for (const auto& l : e.labels) ls.push_back({{"kind", l.kind}, {"root", num(l.root)}, {"residual", num(l.residual)}});
  j["labels"] = ls;
  return j;
}

}  // namespace

Json to_json(cplx z) { return Json::array({num(z.real()), num(z.imag())}); }

double mean_exponent(const std::vector<cplx>& deltas, double slack) {
  if (deltas.empty()) return 0.0;
  double q = 0.0;
  for (const cplx& d : deltas) q += lyapunov_exponent(d, slack);
  return q / static_cast<double>(deltas.size());
}

Json to_json(const SpectralReport& r) {
  Json j;
  j["window"] = {num(r.window.lo), num(r.window.hi)};
  j["grid_step"] = num(r.grid_step);
  j["rtol"] = num(r.rtol);
  Json bands = Json::array();
  for (const auto& b : r.bands) {
    Json prof = Json::array();
    for (const auto& s : b.profile) prof.push_back({{"lo", num(s.lo)}, {"hi", num(s.hi)}, {"count", s.count}});
    bands.push_back({{"lo", num(b.lo)}, {"hi", num(b.hi)}, {"profile", prof}});
  }
  j["bands"] = bands;
  Json gaps = Json::array();
  for (const auto& g : r.gaps) {
    gaps.push_back({{"lo", num(g.lo)},
                    {"hi", num(g.hi)},
                    {"type", g.type},
                    {"truncated", g.truncated},
                    {"lower", endpoint_json(g.lower)},
                    {"upper", endpoint_json(g.upper)}});
  }
  j["gaps"] = gaps;
  j["flags"] = r.flags;
  return j;
}

Json to_json(const GapSum& g) {
  return {{"sum_gap_squares", num(g.lhs)}, {"bound", num(g.rhs)}, {"pass", g.pass}, {"margin", num(g.margin)}};
}

Json to_json(const EigenvalueList& e) {
  Json roots = Json::array();
  for (const auto& r : e.roots) {
    roots.push_back({{"z", num(r.z)},
                     {"multiplicity", r.multiplicity},
                     {"cell", r.cell},
                     {"residual", num(r.residual)},
                     {"contact", r.contact},
                     {"winding_checked", r.winding_checked}});
  }
  return {{"kind", to_string(e.kind)},
          {"n_range", {e.n_lo, e.n_hi}},
          {"roots", roots},
          {"flagged_cells", e.flagged_cells},
          {"max_imag_ratio", num(e.max_imag_ratio)},
          {"imag_consistent", e.imag_consistent}};
}

Json to_json(const DiskResult& d) {
  Json roots = Json::array();
  for (const auto& r : d.roots) roots.push_back({{"z", to_json(r.z)}, {"multiplicity", r.multiplicity}, {"residual", num(r.residual)}});
  return {{"center", to_json(d.requested.center)},
          {"radius", num(d.requested.radius)},
          {"radius_used", num(d.radius_used)},
          {"count", d.count},
          {"roots", roots},
          {"ok", d.ok},
          {"failure", d.failure}};
}

Json to_json(const ResonanceList& r) {
  Json j;
  if (r.window) j["window"] = {num(r.window->lo), num(r.window->hi)};
  Json real = Json::array();
  for (const auto& s : r.real_roots) {
    real.push_back({{"z", num(s.z)}, {"multiplicity", s.multiplicity}, {"cell", s.cell}, {"residual", num(s.residual)}});
  }
  j["real_roots"] = real;
  Json disks = Json::array();
  for (const auto& d : r.disks) disks.push_back(to_json(d));
  j["disks"] = disks;
  j["identically_zero"] = r.identically_zero;
  j["max_imag_ratio"] = num(r.max_imag_ratio);
  j["flags"] = r.flags;
  return j;
}

Json to_json(const AsymptoticsPrediction& p) {
  Json res = Json::array();
  for (const auto& r : p.predicted_resonances) {
    res.push_back({{"alpha", {r.j + 1, r.k + 1}},
                   {"pair", num(r.pair)},
                   {"split_minus", num(r.split_minus)},
                   {"split_plus", num(r.split_plus)},
                   {"coupling", num(r.coupling)}});
  }
  std::vector<double> nu(p.nu.data(), p.nu.data() + p.nu.size());
  return {{"n", p.n},
          {"zeta", p.zeta},
          {"max_imag_zeta", num(p.max_imag_zeta)},
          {"predicted_eigenvalues", p.predicted_eigenvalues},
          {"predicted_resonances", res},
          {"nu", nu},
          {"omitted", p.omitted},
          {"normalized_first", p.normalized_first}};
}

Json to_json(const ValidationReport& v) {
  Json summary = Json::array();
  for (const auto& s : v.summary) {
    summary.push_back({{"family", s.family},
                       {"max_scaled", num(s.max_scaled)},
                       {"first_third_max", num(s.first_third_max)},
                       {"last_third_max", num(s.last_third_max)},
                       {"matched", s.matched},
                       {"unmatched", s.unmatched}});
  }
  return {{"n_range", {v.n_lo, v.n_hi}}, {"rows", v.rows.size()}, {"summary", summary}, {"notes", v.notes}};
}

Json to_json(const GapVerdict& g) {
  Json j;
  j["refused"] = g.refused;
  if (g.refused) {
    j["reason"] = g.reason;
    return j;
  }
  j["verdict"] = g.verdict;
  j["nu"] = std::vector<double>(g.nu.data(), g.nu.data() + g.nu.size());
  j["antidiagonal_sums"] = g.sums;
  Json ev = Json::array();
  for (const auto& e : g.evidence) {
    Json ratios = Json::array();
    for (double r : e.ratios) ratios.push_back(num(r));
    ev.push_back({{"alpha", {e.j + 1, e.k + 1}}, {"abs_coeffs", e.abs_coeffs}, {"ratios", ratios}, {"all_nonzero", e.all_nonzero}});
  }
  j["nondegeneracy_evidence"] = ev;
  j["nondegenerate_within_degree"] = g.nondegenerate;
  return j;
}

Json to_json(const TraceReport& t) {
  Json j;
  j["Q0"] = num(t.q0);
  j["Q1"] = num(t.q1);
  j["Q2"] = num(t.q2);
  j["fitted"] = t.fitted;
  if (t.fitted) {
    j["fitted_Q0"] = num(t.fitted_q0);
    j["fitted_Q1"] = num(t.fitted_q1);
    j["fitted_Q2"] = num(t.fitted_q2);
  }
  j["condition"] = num(t.condition);
  j["detL_defect"] = num(t.detl_defect);
  j["invalid_monodromies"] = t.invalid_monodromies;
  return j;
}

Json to_json(const QuasimomentumSample& q) {
  Json br = Json::array();
  for (const cplx& k : q.branches) br.push_back(to_json(k));
  return {{"z", to_json(q.z)}, {"k", to_json(q.k)}, {"p", num(q.p)}, {"q", num(q.q)}, {"branches", br}, {"flagged", q.flagged}};
}

Json to_json(const BifurcationRecord& b) {
  Json taus = Json::array();
  for (const auto& t : b.roots_by_tau) {
    taus.push_back({{"tau", num(t.tau)},
                    {"minus", to_json(t.minus)},
                    {"plus", to_json(t.plus)},
                    {"classification", t.classification},
                    {"winding_count", t.winding_count},
                    {"radius_used", num(t.radius_used)},
                    {"gap_checked", t.gap_checked},
                    {"gap_verified", t.gap_verified},
                    {"note", t.note}});
  }
  return {{"n", b.n},
          {"r0", num(b.r0)},
          {"disk_radius", num(b.disk_radius)},
          {"roots_by_tau", taus},
          {"slope_estimate", num(b.slope_estimate)},
          {"classification", b.classification},
          {"flagged", b.flagged}};
}

Json to_json(const StabilityReport& s) {
  Json rows = Json::array();
  for (const auto& r : s.rows) {
    rows.push_back({{"tau", num(r.tau)}, {"max_displacement", num(r.max_displacement)}, {"matched", r.matched}, {"unmatched", r.unmatched}});
  }
  return {{"rows", rows},
          {"monotone", s.monotone},
          {"count_radius", num(s.count_radius)},
          {"counts", s.counts},
          {"reference_count", s.reference_count}};
}

std::string spectrum_csv(const SpectralReport& r) {
  std::ostringstream os;
  os << "kind,lo,hi,type,lower_labels,upper_labels,truncated\n";
  for (const auto& b : r.bands) os << "band," << fmt_double(b.lo) << ',' << fmt_double(b.hi) << ",,,,0\n";
  for (const auto& g : r.gaps) {
    os << "gap," << fmt_double(g.lo) << ',' << fmt_double(g.hi) << ',' << g.type << ',' << labels(g.lower) << ','
       << labels(g.upper) << ',' << (g.truncated ? 1 : 0) << '\n';
  }
  return os.str();
}

std::string samples_csv(const SpectralReport& r) {
  std::ostringstream os;
  const std::size_t n = r.samples.empty() ? 0 : r.samples.front().deltas.size();
  os << "z,count,q";
  for (std::size_t j = 1; j <= n; ++j) os << ",re_delta" << j << ",im_delta" << j;
  os << ",re_rho,im_rho\n";
  for (const auto& s : r.samples) {
    os << fmt_double(s.z) << ',' << s.count << ',' << fmt_double(mean_exponent(s.deltas, edge_slack(r.rtol)));
    for (const cplx& d : s.deltas) os << ',' << fmt_double(d.real()) << ',' << fmt_double(d.imag());
    os << ',' << fmt_double(s.rho.real()) << ',' << fmt_double(s.rho.imag()) << '\n';
  }
  return os.str();
}

std::string eigenvalues_csv(const std::vector<EigenvalueList>& lists) {
  std::ostringstream os;
  os << "kind,z,multiplicity,cell,residual,winding_checked\n";
  for (const auto& l : lists) {
    for (const auto& r : l.roots) {
      os << to_string(l.kind) << ',' << fmt_double(r.z) << ',' << r.multiplicity << ',' << r.cell << ','
         << fmt_double(r.residual) << ',' << (r.winding_checked ? 1 : 0) << '\n';
    }
  }
  return os.str();
}

std::string resonances_csv(const ResonanceList& r) {
  std::ostringstream os;
  os << "re,im,multiplicity,residual,source\n";
  for (const auto& s : r.real_roots) os << fmt_double(s.z) << ",0," << s.multiplicity << ',' << fmt_double(s.residual) << ",real-axis\n";
  for (const auto& d : r.disks) {
    for (const auto& c : d.roots) {
      os << fmt_double(c.z.real()) << ',' << fmt_double(c.z.imag()) << ',' << c.multiplicity << ',' << fmt_double(c.residual)
         << ",disk\n";
    }
  }
  return os.str();
}

std::string residuals_csv(const ValidationReport& v) {
  std::ostringstream os;
  os << "n,family,predicted,numeric,residual,residual_n2\n";
  for (const auto& r : v.rows) {
    os << r.n << ',' << r.family << ',' << fmt_double(r.predicted) << ',' << fmt_double(r.numeric) << ','
       << fmt_double(r.residual) << ',' << fmt_double(r.scaled) << '\n';
  }
  return os.str();
}

std::string traces_csv(const TraceReport& t) {
  std::ostringstream os;
  os << "y,re_k_minus_z,im_k_minus_z,re_log_det_l,im_log_det_l,detl_defect\n";
  for (const auto& r : t.rows) {
    os << fmt_double(r.y) << ',' << fmt_double(r.k_minus_z.real()) << ',' << fmt_double(r.k_minus_z.imag()) << ','
       << fmt_double(r.log_det_l.real()) << ',' << fmt_double(r.log_det_l.imag()) << ',' << fmt_double(r.detl_defect) << '\n';
  }
  return os.str();
}

}  // namespace floquet
