#pragma once

#include <string>
#include <vector>

#include "floquet/spectrum.hpp"

namespace floquet {

struct CaseStudyConfig {
  double a = 7.0;
  std::vector<double> tau_values{0.0, 0.01, 0.02, 0.04};
  double nu = 0.05;
  int n_max = 3;
  unsigned jobs = 1;
};

/// Throws InvalidInput naming the offending field.
void check_config(const CaseStudyConfig& cfg);

/// Closed forms for v = diag(-a, 0): one branch with k = sqrt(z^2 - a^2), one free branch.
class UnperturbedReference {
 public:
  explicit UnperturbedReference(double a);

  double a() const noexcept { return a_; }
  cplx k(cplx z) const;
  cplx delta1(cplx z) const;
  cplx delta2(cplx z) const;
  cplx rho(cplx z) const;
  /// tr psi^m = 2 cos(m k) + 2 cos(m z).
  cplx trace(int m, cplx z) const;

  /// r_n^0 = pi n + a^2 / (4 pi n), a double zero of rho, n != 0.
  double resonance(int n) const;
  /// Real zeros of rho with |z| < radius, each counted twice.
  std::vector<double> resonances_within(double radius) const;

  struct Root {
    double z;
    int multiplicity;
    EigenKind kind;
  };
  /// Periodic and antiperiodic eigenvalues with |z| < radius.
  std::vector<Root> eigenvalues_within(double radius) const;
  int eigenvalue_count_within(double radius) const;

 private:
  double a_;
};

struct TauRoots {
  double tau = 0.0;
  cplx minus;   // Im < 0 for a complex pair, else the smaller real root
  cplx plus;
  std::string classification;   // real-gap | complex-pair | flagged
  int winding_count = 0;
  double radius_used = 0.0;
  bool gap_checked = false;
  bool gap_verified = false;
  std::string note;
};

struct BifurcationRecord {
  int n = 0;
  double r0 = 0.0;
  double disk_radius = 0.0;
  std::vector<TauRoots> roots_by_tau;
  double slope_estimate = 0.0;   // |r+ - r-| / (2 |tau|) from the two smallest nonzero |tau|
  std::string classification;    // over the nonzero tau values: real-gap | complex-pair | mixed | flagged
  bool flagged = false;
};

std::vector<BifurcationRecord> bifurcation_sweep(const CaseStudyConfig& cfg, double rtol = kDefaultRtol);

struct StabilityRow {
  double tau = 0.0;
  double max_displacement = 0.0;
  int matched = 0;
  std::vector<std::string> unmatched;
};

struct StabilityReport {
  std::vector<StabilityRow> rows;
  bool monotone = true;          // displacement non-decreasing in |tau|
  double count_radius = 0.0;     // pi n_max + 1
  std::vector<int> counts;       // zeros of det(psi - I) det(psi + I) in the disk, per tau
  int reference_count = 0;       // closed form at tau = 0
};

StabilityReport eigenvalue_stability(const CaseStudyConfig& cfg, double rtol = kDefaultRtol);

/// Zeros of the discriminant in |z| < radius (argument principle).
DiskResult resonance_count(const PeriodicPotential& p, double radius, double rtol = kDefaultRtol);

/// Columns a, nu, n, tau, re_minus, im_minus, re_plus, im_plus, classification, slope.
std::string bifurcation_csv(const CaseStudyConfig& cfg, const std::vector<BifurcationRecord>& records);
/// Columns n, tau, branch, re, im.
std::string trajectory_csv(const std::vector<BifurcationRecord>& records);

}  // namespace floquet
