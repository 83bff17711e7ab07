#pragma once

#include <complex>
#include <cstddef>
#include <utility>
#include <vector>

#include "floquet/monodromy.hpp"

namespace floquet {

struct LyapunovSample {
  cplx z;
  /// N pairs (tau, tau'), |tau| >= |tau'|, paired by smallest |tau tau' - 1|.
  std::vector<std::pair<cplx, cplx>> multipliers;
  double palindromy_residual = 0.0;  // max |tau tau' - 1|
  bool pairing_ok = true;            // palindromy_residual <= 1e-6
  /// N values Delta_j, sorted by (Re, Im).
  std::vector<cplx> deltas;
  double pair_residual = 0.0;        // max spread inside a collapsed L-eigenvalue pair
  double cluster_margin = 0.0;       // min distance between distinct deltas (inf for N = 1)
  double delta_multiplier_residual = 0.0;  // max |Delta_j - (tau + 1/tau)/2|
  cplx rho;                          // prod_{i<j} (Delta_i - Delta_j)^2
  bool near_branch_point = false;
  bool monodromy_valid = true;
};

/// L = (psi + psi^{-1}) / 2 with psi^{-1} = -J psi^T J.
CMatrix lyapunov_matrix(const CMatrix& psi);

LyapunovSample sample(const PeriodicPotential& p, cplx z, double rtol = kDefaultRtol);
LyapunovSample sample_from(const MonodromyResult& m);

/// rho = (T2 + 4) / 2 - T1^2 / 4, only for N = 2.
cplx rho_n2(const PeriodicPotential& p, cplx z, double rtol = kDefaultRtol);
cplx rho_n2_from(const CMatrix& psi);

/// Discriminant of the Lyapunov polynomial as the Hankel determinant of the
/// power sums s_m = tr L^m / 2. Entire in z and equal to the product form.
struct DiscriminantValue {
  cplx value;
  cplx derivative;
};
cplx discriminant(const CMatrix& psi);
DiscriminantValue discriminant(const CMatrix& psi, const CMatrix& dpsi);

struct BranchTrack {
  std::vector<cplx> contour;
  /// values[i][j]: branch j at contour[i].
  std::vector<std::vector<cplx>> values;
  /// Index i marks the cell [contour[i], contour[i+1]] as a collision cell.
  std::vector<std::size_t> collision_cells;
  std::size_t subdivisions = 0;
};

inline constexpr double kCollisionTol = 1e-6;
inline constexpr int kMaxSubdivisions = 8;

/// Continues the N branches Delta_j along a polyline contour.
BranchTrack track(const PeriodicPotential& p, const std::vector<cplx>& contour, double rtol = kDefaultRtol);

}  // namespace floquet
