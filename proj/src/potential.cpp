#include "floquet/potential.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace floquet {

TrigPoly::TrigPoly(int degree, std::vector<cplx> coeffs) : degree_(degree), coeffs_(std::move(coeffs)) {
  if (degree < 0 || coeffs_.size() != static_cast<std::size_t>(2 * degree + 1)) {
    throw InvalidInput("TrigPoly: coefficient vector must have size 2 * degree + 1");
  }
  for (const cplx& c : coeffs_) {
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) {
      throw InvalidInput("TrigPoly: non-finite coefficient");
    }
  }
}

TrigPoly TrigPoly::constant(cplx c) { return TrigPoly(0, {c}); }

void TrigPoly::set_coeff(int m, cplx c) {
  const int need = std::abs(m);
  if (need > degree_) {
    std::vector<cplx> grown(2 * need + 1, cplx(0.0));
    for (int k = -degree_; k <= degree_; ++k) grown[k + need] = coeffs_[k + degree_];
    coeffs_ = std::move(grown);
    degree_ = need;
  }
  coeffs_[m + degree_] = c;
}

cplx TrigPoly::eval_w(cplx w) const noexcept {
  cplx pos(0.0);
  for (int m = degree_; m >= 0; --m) pos = pos * w + coeffs_[m + degree_];
  if (degree_ == 0) return pos;
  const cplx wbar = std::conj(w);
  cplx neg(0.0);
  for (int m = degree_; m >= 1; --m) neg = (neg + coeffs_[degree_ - m]) * wbar;
  return pos + neg;
}

TrigPoly TrigPoly::derivative() const {
  std::vector<cplx> d(coeffs_.size());
  for (int m = -degree_; m <= degree_; ++m) {
    d[m + degree_] = cplx(0.0, 2.0 * kPi * m) * coeffs_[m + degree_];
  }
  return TrigPoly(degree_, std::move(d));
}

TrigPoly TrigPoly::conj_function() const {
  std::vector<cplx> d(coeffs_.size());
  for (int m = -degree_; m <= degree_; ++m) d[m + degree_] = std::conj(coeffs_[-m + degree_]);
  return TrigPoly(degree_, std::move(d));
}

double TrigPoly::l2_norm2() const noexcept {
  double s = 0.0;
  for (const cplx& c : coeffs_) s += std::norm(c);
  return s;
}

bool TrigPoly::is_zero() const noexcept {
  return std::all_of(coeffs_.begin(), coeffs_.end(), [](cplx c) { return c == cplx(0.0); });
}

TrigPoly TrigPoly::trimmed() const {
  int d = degree_;
  while (d > 0 && coeff(d) == cplx(0.0) && coeff(-d) == cplx(0.0)) --d;
  std::vector<cplx> c(2 * d + 1);
  for (int m = -d; m <= d; ++m) c[m + d] = coeff(m);
  return TrigPoly(d, std::move(c));
}

TrigPoly operator+(const TrigPoly& a, const TrigPoly& b) {
  const int d = std::max(a.degree_, b.degree_);
  std::vector<cplx> c(2 * d + 1);
  for (int m = -d; m <= d; ++m) c[m + d] = a.coeff(m) + b.coeff(m);
  return TrigPoly(d, std::move(c));
}

TrigPoly operator*(const TrigPoly& a, const TrigPoly& b) {
  const int d = a.degree_ + b.degree_;
  std::vector<cplx> c(2 * d + 1, cplx(0.0));
  for (int i = -a.degree_; i <= a.degree_; ++i) {
    const cplx ai = a.coeff(i);
    if (ai == cplx(0.0)) continue;
    for (int j = -b.degree_; j <= b.degree_; ++j) c[i + j + d] += ai * b.coeff(j);
  }
  return TrigPoly(d, std::move(c));
}

TrigPoly operator*(cplx s, const TrigPoly& a) {
  std::vector<cplx> c(a.coeffs_);
  for (cplx& x : c) x *= s;
  return TrigPoly(a.degree_, std::move(c));
}

bool operator==(const TrigPoly& a, const TrigPoly& b) {
  const int d = std::max(a.degree_, b.degree_);
  for (int m = -d; m <= d; ++m) {
    if (a.coeff(m) != b.coeff(m)) return false;
  }
  return true;
}

TrigPoly periodized_gaussian(double nu) {
  if (!(nu > 0.0) || !std::isfinite(nu)) throw InvalidInput("periodized_gaussian: nu must be positive");
  const int m_max = static_cast<int>(std::ceil(6.0 / nu));
  std::vector<cplx> c(2 * m_max + 1);
  for (int m = -m_max; m <= m_max; ++m) {
    const double sign = (m % 2 == 0) ? 1.0 : -1.0;
    c[m + m_max] = sign * std::exp(-2.0 * kPi * kPi * nu * nu * m * m);
  }
  return TrigPoly(m_max, std::move(c));
}

// --- PeriodicPotential -----------------------------------------------------

PeriodicPotential::PeriodicPotential(std::size_t n, std::vector<TrigPoly> entries, PotentialOrigin origin)
    : n_(n), entries_(std::move(entries)), origin_(std::move(origin)) {
  if (n == 0) throw InvalidInput("potential: N must be at least 1");
  if (entries_.size() != n * n) throw InvalidInput("potential: expected N * N entries");
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = j + 1; k < n; ++k) {
      if (!(entries_[j * n + k] == entries_[k * n + j])) {
        throw InvalidInput("potential: v is not symmetric at entry (" + std::to_string(j + 1) + "," +
                           std::to_string(k + 1) + ")");
      }
    }
  }
  for (auto& e : entries_) e = e.trimmed();
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = j; k < n; ++k) {
      if (!entries_[j * n + k].is_zero()) upper_.emplace_back(j, k);
    }
  }
}

PeriodicPotential PeriodicPotential::zero(std::size_t n) {
  return PeriodicPotential(n, std::vector<TrigPoly>(n * n), {"zero", {{"N", static_cast<double>(n)}}});
}

PeriodicPotential PeriodicPotential::constant(const CMatrix& v0) {
  if (v0.rows() == 0 || v0.rows() != v0.cols()) throw InvalidInput("constant: v0 must be square");
  const auto n = static_cast<std::size_t>(v0.rows());
  std::vector<TrigPoly> e;
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = 0; k < n; ++k) e.push_back(TrigPoly::constant(v0(j, k)));
  }
  return PeriodicPotential(n, std::move(e));
}

PeriodicPotential PeriodicPotential::diagonal(const std::vector<cplx>& d) {
  if (d.empty()) throw InvalidInput("diagonal: empty list");
  const std::size_t n = d.size();
  std::vector<TrigPoly> e(n * n);
  for (std::size_t j = 0; j < n; ++j) e[j * n + j] = TrigPoly::constant(d[j]);
  return PeriodicPotential(n, std::move(e));
}

PeriodicPotential PeriodicPotential::example_4x4(double a, double tau, double nu) {
  if (!std::isfinite(a) || !std::isfinite(tau) || !std::isfinite(nu)) {
    throw InvalidInput("example_4x4: non-finite parameter");
  }
  std::vector<TrigPoly> e(4);
  e[0] = TrigPoly::constant(-a);
  if (tau != 0.0) {
    const TrigPoly b = periodized_gaussian(nu);
    e[1] = cplx(-tau) * b;
    e[2] = e[1];
  }
  return PeriodicPotential(2, std::move(e), {"example_4x4", {{"a", a}, {"tau", tau}, {"nu", nu}}});
}

int PeriodicPotential::degree() const noexcept {
  int d = 0;
  for (const auto& e : entries_) d = std::max(d, e.degree());
  return d;
}

void PeriodicPotential::eval_v(double t, cplx* out) const noexcept {
  std::fill(out, out + n_ * n_, cplx(0.0));
  const cplx w = std::polar(1.0, 2.0 * kPi * t);
  for (const auto& [j, k] : upper_) {
    const cplx val = entries_[j * n_ + k].eval_w(w);
    out[j * n_ + k] = val;
    out[k * n_ + j] = val;
  }
}

CMatrix PeriodicPotential::v_at(double t) const {
  CMatrix v(n_, n_);
  std::vector<cplx> buf(n_ * n_);
  eval_v(t, buf.data());
  for (std::size_t j = 0; j < n_; ++j) {
    for (std::size_t k = 0; k < n_; ++k) v(j, k) = buf[j * n_ + k];
  }
  return v;
}

namespace {

CMatrix assemble(const CMatrix& v) {
  const Eigen::Index n = v.rows();
  CMatrix big = CMatrix::Zero(2 * n, 2 * n);
  big.topRightCorner(n, n) = v;
  big.bottomLeftCorner(n, n) = v.adjoint();
  return big;
}

}  // namespace

CMatrix PeriodicPotential::V_at(double t) const { return assemble(v_at(t)); }

CMatrix PeriodicPotential::dV_at(double t) const {
  CMatrix v(n_, n_);
  for (std::size_t j = 0; j < n_; ++j) {
    for (std::size_t k = 0; k < n_; ++k) v(j, k) = entries_[j * n_ + k].derivative()(t);
  }
  return assemble(v);
}

double PeriodicPotential::norm2() const noexcept {
  double s = 0.0;
  for (const auto& e : entries_) s += e.l2_norm2();
  return 2.0 * s;
}

double PeriodicPotential::sup_bound() const noexcept {
  double best = 0.0;
  for (std::size_t j = 0; j < n_; ++j) {
    double row = 0.0;
    for (std::size_t k = 0; k < n_; ++k) {
      const auto& e = entries_[j * n_ + k];
      for (int m = -e.degree(); m <= e.degree(); ++m) row += std::abs(e.coeff(m));
    }
    best = std::max(best, row);
  }
  return best;
}

bool PeriodicPotential::is_zero() const noexcept { return upper_.empty(); }

// --- moments and Fourier data ----------------------------------------------

PotentialMoments moments(const PeriodicPotential& p) {
  const auto n = static_cast<Eigen::Index>(p.n());
  const int deg = p.degree();
  PotentialMoments out;
  out.calV0 = CMatrix::Zero(n, n);
  CMatrix lower = CMatrix::Zero(n, n);
  for (int m = -deg; m <= deg; ++m) {
    CMatrix c(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index k = 0; k < n; ++k) c(j, k) = p.entry(j, k).coeff(m);
    }
    out.calV0 += c * c.adjoint();
    lower += c.adjoint() * c;
  }
  out.calV = CMatrix::Zero(2 * n, 2 * n);
  out.calV.topLeftCorner(n, n) = out.calV0;
  out.calV.bottomRightCorner(n, n) = lower;
  out.h0 = out.calV.trace().real();
  out.nu = hermitian_eigen(out.calV0).values;

  double off = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index k = 0; k < n; ++k) {
      if (j != k) off = std::max(off, std::abs(out.calV0(j, k)));
    }
  }
  out.normal_form = off <= 1e-10 * std::max(1.0, norm_max(out.calV0));

  // Trapezoid rule is exact here: the integrands have degree <= 4M < nodes.
  const int nodes = 10 * (deg + 1);
  const CMatrix j1 = j1_matrix(p.n());
  const cplx minus_i(0.0, -1.0);
  cplx h1(0.0), h2(0.0);
  for (int q = 0; q < nodes; ++q) {
    const double t = static_cast<double>(q) / nodes;
    const CMatrix v = p.V_at(t);
    const CMatrix dv = p.dV_at(t);
    const CMatrix v2 = v * v;
    h1 += (minus_i * j1 * dv * v).trace();
    h2 += (dv * dv + v2 * v2).trace();
  }
  out.h1 = h1.real() / nodes;
  out.h2 = h2.real() / nodes;
  return out;
}

FourierData fourier_data(const PeriodicPotential& p, int n) {
  const auto dim = static_cast<Eigen::Index>(p.n());
  FourierData out;
  out.n = n;
  out.vhat_prime = CMatrix(dim, dim);
  const cplx factor(0.0, 2.0 * kPi * n);
  for (Eigen::Index j = 0; j < dim; ++j) {
    for (Eigen::Index k = 0; k < dim; ++k) out.vhat_prime(j, k) = factor * p.entry(j, k).coeff(n);
  }
  out.Vhat_prime = assemble(out.vhat_prime);
  out.gamma_part = cplx(0.0, -1.0) * j1_matrix(p.n()) * out.Vhat_prime;
  return out;
}

// --- normal form -----------------------------------------------------------

namespace {

CMatrix coeff_matrix(const std::vector<TrigPoly>& e, std::size_t n, int m) {
  CMatrix c(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = 0; k < n; ++k) c(j, k) = e[j * n + k].coeff(m);
  }
  return c;
}

int max_degree(const std::vector<TrigPoly>& e) {
  int d = 0;
  for (const auto& x : e) d = std::max(d, x.degree());
  return d;
}

NormalizedPotential conjugate_to_diagonal(std::size_t n, const std::vector<TrigPoly>& omega) {
  const int deg = max_degree(omega);
  const auto dim = static_cast<Eigen::Index>(n);
  CMatrix gram = CMatrix::Zero(dim, dim);
  for (int m = -deg; m <= deg; ++m) {
    const CMatrix c = coeff_matrix(omega, n, m);
    gram += c * c.adjoint();
  }
  const HermitianEigen he = hermitian_eigen(gram);
  if (he.values.minCoeff() < -1e-10 * std::max(1.0, he.values.cwiseAbs().maxCoeff())) {
    throw NumericalFailure("normalize: integral of omega omega^* is not positive semi-definite");
  }
  const CMatrix& e = he.vectors;
  std::vector<TrigPoly> v(n * n, TrigPoly());
  for (int m = -deg; m <= deg; ++m) {
    CMatrix vm = e.adjoint() * coeff_matrix(omega, n, m) * e.conjugate();
    vm = 0.5 * (vm + vm.transpose()).eval();
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t k = 0; k < n; ++k) v[j * n + k].set_coeff(m, vm(j, k));
    }
  }
  NormalizedPotential out{PeriodicPotential(n, std::move(v)), CMatrix::Zero(2 * dim, 2 * dim),
                          CMatrix::Zero(2 * dim, 2 * dim)};
  out.calE.topLeftCorner(dim, dim) = e;
  out.calE.bottomRightCorner(dim, dim) = e.conjugate();
  const double s = 1.0 / std::sqrt(2.0);
  const CMatrix eye = CMatrix::Identity(dim, dim);
  out.calU.topLeftCorner(dim, dim) = s * eye;
  out.calU.topRightCorner(dim, dim) = cplx(0.0, -s) * eye;
  out.calU.bottomLeftCorner(dim, dim) = s * eye;
  out.calU.bottomRightCorner(dim, dim) = cplx(0.0, s) * eye;
  return out;
}

void require_self_adjoint(const std::vector<TrigPoly>& om, std::size_t n, const char* name) {
  if (om.size() != n * n) throw InvalidInput(std::string("normalize: ") + name + " must have N * N entries");
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = 0; k < n; ++k) {
      const TrigPoly& a = om[j * n + k];
      const TrigPoly b = om[k * n + j].conj_function();
      const int d = std::max(a.degree(), b.degree());
      for (int m = -d; m <= d; ++m) {
        if (std::abs(a.coeff(m) - b.coeff(m)) > 1e-12 * (1.0 + std::abs(a.coeff(m)))) {
          throw InvalidInput(std::string("normalize: ") + name + " is not self-adjoint at entry (" +
                             std::to_string(j + 1) + "," + std::to_string(k + 1) + ")");
        }
      }
    }
  }
}

}  // namespace

NormalizedPotential normalize(const OmegaPair& omega) {
  const std::size_t n = omega.n;
  if (n == 0) throw InvalidInput("normalize: N must be at least 1");
  require_self_adjoint(omega.omega1, n, "Omega_1");
  require_self_adjoint(omega.omega2, n, "Omega_2");
  std::vector<TrigPoly> w(n * n);
  for (std::size_t q = 0; q < n * n; ++q) {
    w[q] = cplx(-1.0) * omega.omega2[q] + cplx(0.0, 1.0) * omega.omega1[q];
  }
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = j + 1; k < n; ++k) {
      const TrigPoly& a = w[j * n + k];
      const TrigPoly& b = w[k * n + j];
      const int d = std::max(a.degree(), b.degree());
      for (int m = -d; m <= d; ++m) {
        if (std::abs(a.coeff(m) - b.coeff(m)) > 1e-12 * (1.0 + std::abs(a.coeff(m)))) {
          throw InvalidInput("normalize: omega = -Omega_2 + i Omega_1 is not symmetric at entry (" +
                             std::to_string(j + 1) + "," + std::to_string(k + 1) + ")");
        }
      }
    }
  }
  return conjugate_to_diagonal(n, w);
}

NormalizedPotential to_normal_form(const PeriodicPotential& p) {
  std::vector<TrigPoly> w;
  for (std::size_t j = 0; j < p.n(); ++j) {
    for (std::size_t k = 0; k < p.n(); ++k) w.push_back(p.entry(j, k));
  }
  return conjugate_to_diagonal(p.n(), w);
}

}  // namespace floquet
