#pragma once

#include <complex>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "floquet/linalg.hpp"

namespace floquet {

/// f(t) = sum_{|m| <= M} c_m exp(i 2 pi m t), 1-periodic.
class TrigPoly {
 public:
  TrigPoly() : coeffs_(1, cplx(0.0)) {}
  /// coeffs[m + degree] = c_m; size must be 2 * degree + 1.
  TrigPoly(int degree, std::vector<cplx> coeffs);
  static TrigPoly constant(cplx c);

  int degree() const noexcept { return degree_; }
  cplx coeff(int m) const noexcept {
    return (m < -degree_ || m > degree_) ? cplx(0.0) : coeffs_[m + degree_];
  }
  void set_coeff(int m, cplx c);

  cplx operator()(double t) const noexcept { return eval_w(std::polar(1.0, 2.0 * kPi * t)); }
  /// Value at w = exp(i 2 pi t) with |w| = 1.
  cplx eval_w(cplx w) const noexcept;

  TrigPoly derivative() const;
  /// Coefficients of conj(f(t)).
  TrigPoly conj_function() const;
  /// Integral of |f|^2 over one period.
  double l2_norm2() const noexcept;
  bool is_zero() const noexcept;
  /// Drops vanishing top coefficients.
  TrigPoly trimmed() const;

  friend TrigPoly operator+(const TrigPoly& a, const TrigPoly& b);
  friend TrigPoly operator*(const TrigPoly& a, const TrigPoly& b);
  friend TrigPoly operator*(cplx s, const TrigPoly& a);
  friend bool operator==(const TrigPoly& a, const TrigPoly& b);

 private:
  int degree_ = 0;
  std::vector<cplx> coeffs_;
};

/// Fourier coefficients of the 1-periodized Gaussian of standard deviation nu
/// centred at t = 1/2, unit mass, truncated at |m| <= ceil(6 / nu).
TrigPoly periodized_gaussian(double nu);

/// Origin of a potential, kept so reports and files can name it.
struct PotentialOrigin {
  std::string builtin;                    // empty for coefficient tables
  std::map<std::string, double> params;
};

/// V(t) = [[0, v(t)], [v(t)^*, 0]] with v complex symmetric and 1-periodic.
class PeriodicPotential {
 public:
  /// entries is row-major N x N; v must equal its transpose coefficientwise.
  PeriodicPotential(std::size_t n, std::vector<TrigPoly> entries, PotentialOrigin origin = {});

  static PeriodicPotential zero(std::size_t n);
  /// v0 is N x N complex symmetric.
  static PeriodicPotential constant(const CMatrix& v0);
  static PeriodicPotential diagonal(const std::vector<cplx>& d);
  /// v = -[[a, tau b_nu], [tau b_nu, 0]].
  static PeriodicPotential example_4x4(double a, double tau, double nu);

  std::size_t n() const noexcept { return n_; }
  std::size_t dim() const noexcept { return 2 * n_; }
  int degree() const noexcept;
  const TrigPoly& entry(std::size_t j, std::size_t k) const { return entries_[j * n_ + k]; }
  const PotentialOrigin& origin() const noexcept { return origin_; }

  CMatrix v_at(double t) const;
  CMatrix V_at(double t) const;
  CMatrix dV_at(double t) const;
  /// Writes v(t) row-major into out (size N * N).
  void eval_v(double t, cplx* out) const noexcept;

  /// ||V||^2 = integral of tr V^2 = 2 sum |c|^2.
  double norm2() const noexcept;
  /// Upper bound for sup_t ||v(t)||: sum over entries of sum |c_m|, row-summed.
  double sup_bound() const noexcept;
  bool is_zero() const noexcept;

 private:
  std::size_t n_;
  std::vector<TrigPoly> entries_;
  std::vector<std::pair<std::size_t, std::size_t>> upper_;  // non-zero j <= k
  PotentialOrigin origin_;
};

struct PotentialMoments {
  CMatrix calV;        // integral of V^2, 2N x 2N
  CMatrix calV0;       // upper block, integral of v v^*
  Eigen::VectorXd nu;  // eigenvalues of calV0, ascending
  double h0 = 0.0;     // tr integral V^2
  double h1 = 0.0;     // tr integral (-i J1 V' V)
  double h2 = 0.0;     // tr integral (V'^2 + V^4)
  bool normal_form = false;
};

PotentialMoments moments(const PeriodicPotential& p);

/// hat v'_n = integral of v'(t) exp(-i 2 pi n t) (N x N) and the Hermitian
/// matrix -i J1 hat V'_n that enters the eigenvalue asymptotics.
struct FourierData {
  int n = 0;
  CMatrix vhat_prime;     // N x N
  CMatrix Vhat_prime;     // [[0, hat v'], [hat v'^*, 0]]
  CMatrix gamma_part;     // -i J1 Vhat_prime
};

FourierData fourier_data(const PeriodicPotential& p, int n);

/// Self-adjoint 1-periodic N x N matrices Omega_1, Omega_2 with
/// omega = -Omega_2 + i Omega_1 complex symmetric.
struct OmegaPair {
  std::size_t n = 0;
  std::vector<TrigPoly> omega1;
  std::vector<TrigPoly> omega2;
};

struct NormalizedPotential {
  PeriodicPotential potential;
  CMatrix calE;   // diag(E, conj E), unitary
  CMatrix calU;   // (1 / sqrt 2) [[I, -i I], [I, i I]]
};

NormalizedPotential normalize(const OmegaPair& omega);
/// Same conjugation applied directly to v, so that integral v v^* is diagonal.
NormalizedPotential to_normal_form(const PeriodicPotential& p);

/// Plain-text key = value description; see README for the grammar.
PeriodicPotential read_potential(const std::string& path);
PeriodicPotential parse_potential(const std::string& text, const std::string& source = "<string>");
std::string format_potential(const PeriodicPotential& p);
void write_potential(const PeriodicPotential& p, const std::string& path);

}  // namespace floquet
