#pragma once

#include <complex>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "floquet/linalg.hpp"

namespace floquet {

/// Value and derivative of a real function.
struct ValueSlope {
  double f = 0.0;
  double df = 0.0;
};
using RealFunction = std::function<ValueSlope(double)>;

struct RealRoot {
  double z = 0.0;
  int multiplicity = 1;
  double residual = 0.0;  // |f(z)| / scale
  bool contact = false;   // found as a non-sign-changing minimum of |f|
};

// Relative to the largest sample in the surrounding cell. The discriminant
// near a double root sits on a roundoff floor of a few 1e-12.
inline constexpr double kContactThreshold = 1e-10;
inline constexpr double kMergeTol = 1e-7;

/// Roots of f on the sampled grid: sign changes of f give simple roots,
/// sign changes of f' toward zero give touching minima that are either double
/// roots (|f| <= kContactThreshold * scale) or two nearby simple roots. The scale of a
/// root is max |f| over grid nodes within half_cell of it.
std::vector<RealRoot> real_roots(const std::vector<double>& grid, const std::vector<ValueSlope>& samples,
                                 const RealFunction& f, double half_cell, double xtol = 1e-12);

using ComplexFunction = std::function<cplx(cplx)>;

struct Winding {
  int count = 0;
  double min_abs = 0.0;
  bool reliable = true;  // every phase step stayed below pi/4 after refinement
  int evaluations = 0;
};

/// Argument-principle count on |z - c| = r with adaptive arc refinement.
Winding winding_number(const ComplexFunction& f, cplx center, double radius, int points = 32,
                       int max_points = 2048);

/// Value and derivative of an analytic function.
using AnalyticFunction = std::function<std::pair<cplx, cplx>(cplx)>;

struct DiskRoots {
  cplx center;
  double radius = 0.0;   // after nudges
  int count = 0;         // winding number
  std::vector<std::pair<cplx, int>> roots;  // refined roots with multiplicity
  int nudges = 0;
  double boundary_max = 0.0;  // max |f| on the boundary grid
  bool ok = true;
  std::string failure;
};

/// Counts zeros of f in a disk on a uniform boundary grid and locates them
/// from contour moments, then polishes each root.
DiskRoots roots_in_disk(const AnalyticFunction& f, cplx center, double radius, int points = 512);

}  // namespace floquet
