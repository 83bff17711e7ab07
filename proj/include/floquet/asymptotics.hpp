#pragma once

#include <string>
#include <vector>

#include "floquet/spectrum.hpp"

namespace floquet {

struct ResonancePrediction {
  int j = 0;   // 0-based, j < k
  int k = 0;
  double pair = 0.0;        // pi n + (nu_j + nu_k) / (4 pi n), a double root
  double split_minus = 0.0; // pi n + ((nu_j + nu_k) / 2 - |hat v'_{n,jk}|) / (2 pi n)
  double split_plus = 0.0;  // pi n + ((nu_j + nu_k) / 2 + |hat v'_{n,jk}|) / (2 pi n)
  double coupling = 0.0;    // |hat v'_{n,jk}|
};

struct AsymptoticsPrediction {
  int n = 0;
  std::vector<double> zeta;                  // 2N real eigenvalues, ascending
  double max_imag_zeta = 0.0;
  std::vector<double> predicted_eigenvalues; // pi n + zeta / (2 pi n)
  std::vector<ResonancePrediction> predicted_resonances;
  std::vector<std::string> omitted;          // families left out, with the reason
  Eigen::VectorXd nu;
  bool normalized_first = false;
};

AsymptoticsPrediction predict(const PeriodicPotential& p, int n);

/// cos(z - nu / (2 z)), the leading shape of a Lyapunov branch.
cplx branch_shape(double nu, cplx z);

struct ResidualRow {
  int n = 0;
  std::string family;   // eigenvalue | resonance_pair | resonance_split
  double predicted = 0.0;
  double numeric = 0.0; // NaN when no numeric root was matched
  double residual = 0.0;
  double scaled = 0.0;  // residual * n^2
};

struct FamilySummary {
  std::string family;
  double max_scaled = 0.0;
  double first_third_max = 0.0;
  double last_third_max = 0.0;
  int matched = 0;
  int unmatched = 0;
};

struct ValidationReport {
  int n_lo = 0;
  int n_hi = 0;
  std::vector<ResidualRow> rows;
  std::vector<FamilySummary> summary;
  std::vector<std::string> notes;
};

ValidationReport validate(const PeriodicPotential& p, int n_lo, int n_hi, double rtol = kDefaultRtol,
                          const RootOptions& opt = {});

struct AlphaEvidence {
  int j = 0;
  int k = 0;
  std::vector<double> abs_coeffs;  // |hat v'_{n,alpha}|, n = 1..degree
  std::vector<double> ratios;      // (|hat v'|^2 + 1/n) / |hat v'| (inf where the coefficient vanishes)
  bool all_nonzero = false;
};

struct GapVerdict {
  bool refused = false;
  std::string reason;
  std::string verdict;             // finitely-many-gaps-predicted | infinite-gaps-possible
  Eigen::VectorXd nu;
  std::vector<double> sums;        // nu_j + nu_{N+1-j}
  std::vector<AlphaEvidence> evidence;
  bool nondegenerate = false;
};

GapVerdict gap_criterion(const PeriodicPotential& p);

struct QuasimomentumSample {
  cplx z;
  cplx k;
  double p = 0.0;
  double q = 0.0;
  std::vector<cplx> branches;  // k_j
  bool flagged = false;        // inside a collision cell of the branch track
};

/// arccos of one Lyapunov value on the physical sheet (Im >= 0); values
/// real to 1e-7 inside [-1 - slack, 1 + slack] are treated as real.
double lyapunov_exponent(cplx delta, double slack = 0.0);

std::vector<QuasimomentumSample> quasimomentum(const PeriodicPotential& p, const std::vector<cplx>& contour,
                                               double rtol = kDefaultRtol);

struct TraceRow {
  double y = 0.0;
  cplx k_minus_z;
  cplx log_det_l;
  cplx predicted_log_det_l;
  double detl_defect = 0.0;
};

struct TraceReport {
  double q0 = 0.0, q1 = 0.0, q2 = 0.0;
  bool fitted = false;
  double fitted_q0 = 0.0, fitted_q1 = 0.0, fitted_q2 = 0.0;
  double condition = 0.0;
  double detl_defect = 0.0;   // max over heights
  std::vector<TraceRow> rows;
  int invalid_monodromies = 0;
};

TraceReport trace_check(const PeriodicPotential& p, const std::vector<double>& heights, double rtol = kDefaultRtol);

}  // namespace floquet
