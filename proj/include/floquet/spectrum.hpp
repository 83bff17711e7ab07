#pragma once

#include <optional>
#include <string>
#include <vector>

#include "floquet/lyapunov.hpp"
#include "floquet/roots.hpp"

namespace floquet {

struct Window {
  double lo = 0.0;
  double hi = 0.0;
};

/// Values of det(psi - I), det(psi + I) and the discriminant with their z-derivatives
/// at a real point, all from one augmented integration.
struct RealAxisNode {
  double z = 0.0;
  ValueSlope periodic;      // Re det(psi(1,z) - I)
  ValueSlope antiperiodic;  // Re det(psi(1,z) + I)
  ValueSlope rho;           // Re discriminant
  double imag_periodic = 0.0;
  double imag_antiperiodic = 0.0;
  double imag_rho = 0.0;
};

RealAxisNode eval_real_axis(const PeriodicPotential& p, double z, double rtol);

struct RealAxisScan {
  std::vector<double> grid;
  std::vector<RealAxisNode> nodes;
};

RealAxisScan scan_real_axis(const PeriodicPotential& p, Window w, double step, double rtol, unsigned jobs = 1);

enum class EigenKind { periodic, antiperiodic };
std::string to_string(EigenKind k);

struct SpectralRoot {
  double z = 0.0;
  int multiplicity = 1;
  double residual = 0.0;   // |f(z)| / cell scale
  int cell = 0;            // round(z / pi)
  bool contact = false;
  bool winding_checked = false;
};

struct EigenvalueList {
  EigenKind kind = EigenKind::periodic;
  int n_lo = 0;
  int n_hi = 0;
  std::vector<SpectralRoot> roots;
  std::vector<int> flagged_cells;  // more than 2N roots with multiplicity
  double max_imag_ratio = 0.0;     // max |Im f| / scale on the grid
  bool imag_consistent = true;     // max_imag_ratio <= 1e-8
};

struct RootOptions {
  double grid_step = kPi / 256.0;
  bool verify_multiplicity = true;
  unsigned jobs = 1;
};

/// Roots of z -> det(psi(1,z) -+ I) over the cells |z - pi n| < pi/2, n in [n_lo, n_hi].
EigenvalueList find_eigenvalues(const PeriodicPotential& p, EigenKind kind, int n_lo, int n_hi,
                                double rtol = kDefaultRtol, const RootOptions& opt = {});
EigenvalueList eigenvalues_from_scan(const PeriodicPotential& p, const RealAxisScan& scan, EigenKind kind,
                                     int n_lo, int n_hi, double rtol, const RootOptions& opt);

struct Disk {
  cplx center;
  double radius = 0.0;
};

struct ComplexResonance {
  cplx z;
  int multiplicity = 1;
  double residual = 0.0;  // |rho(z)| / max |rho| on the disk boundary
};

struct DiskResult {
  Disk requested;
  double radius_used = 0.0;
  int count = 0;
  std::vector<ComplexResonance> roots;
  bool ok = true;
  std::string failure;
};

struct ResonanceList {
  std::optional<Window> window;
  std::vector<SpectralRoot> real_roots;
  std::vector<DiskResult> disks;
  bool identically_zero = false;   // rho vanishes on the whole window (e.g. V = 0)
  double max_imag_ratio = 0.0;
  std::vector<std::string> flags;
};

ResonanceList find_resonances(const PeriodicPotential& p, Window w, double rtol = kDefaultRtol,
                              const RootOptions& opt = {});
ResonanceList resonances_from_scan(const PeriodicPotential& p, const RealAxisScan& scan, Window w, double rtol,
                                   const RootOptions& opt);
DiskResult find_resonances(const PeriodicPotential& p, Disk d, double rtol = kDefaultRtol);

struct NodeSample {
  double z = 0.0;
  std::vector<cplx> deltas;
  cplx rho;
  int count = 0;   // number of Delta_j real (1e-7) inside [-1, 1]
};

struct Segment {
  double lo = 0.0;
  double hi = 0.0;
  int count = 0;
};

struct EndpointLabel {
  std::string kind;   // periodic | antiperiodic | resonance
  double root = 0.0;
  double residual = 0.0;
};

struct Endpoint {
  double z = 0.0;
  bool window_edge = false;
  std::vector<EndpointLabel> labels;
};

struct Band {
  double lo = 0.0;
  double hi = 0.0;
  std::vector<Segment> profile;   // multiplicity profile inside the band
};

struct Gap {
  double lo = 0.0;
  double hi = 0.0;
  Endpoint lower;
  Endpoint upper;
  std::string type;   // stable (all Delta real) | resonance (some Delta complex)
  bool truncated = false;
};

struct SpectralReport {
  Window window;
  double grid_step = 0.0;
  double rtol = 0.0;
  std::vector<Band> bands;
  std::vector<Gap> gaps;
  std::vector<Segment> segments;
  std::vector<NodeSample> samples;
  std::vector<std::string> flags;
  bool flagged() const { return !flags.empty(); }
};

inline constexpr double kRealTol = 1e-7;
inline constexpr double kEdgeWidth = 1e-9;

/// Number of Delta_j with |Im| <= kRealTol and |Re| <= 1 + slack.
int spectral_count(const std::vector<cplx>& deltas, double slack = 0.0);

/// Slack on |Re Delta| <= 1 used by scan_bands; integration error at a closed gap
/// otherwise opens a spurious gap of width ~ sqrt(rtol).
inline double edge_slack(double rtol) { return 100.0 * rtol; }

SpectralReport scan_bands(const PeriodicPotential& p, Window w, double grid_step = kPi / 200.0,
                          double rtol = kDefaultRtol, unsigned jobs = 1);

struct GapSum {
  double lhs = 0.0;
  double rhs = 0.0;
  bool pass = true;
  double margin = 0.0;   // rhs - lhs
};

GapSum gap_sum_check(const SpectralReport& report, const PeriodicPotential& p);

}  // namespace floquet
