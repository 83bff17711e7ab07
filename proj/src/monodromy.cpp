#include "floquet/monodromy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/numeric/odeint.hpp>

namespace floquet {

namespace ode = boost::numeric::odeint;

namespace {

using State = std::vector<cplx>;

// Column-major 2N x cols state. Columns [0, 2N) hold psi; with the
// derivative, columns [2N, 4N) hold d psi / dz.
struct Rhs {
  const PeriodicPotential* p;
  cplx z;
  std::size_t n;
  std::size_t cols;
  bool derivative;
  mutable std::vector<cplx> v;

  void operator()(const State& y, State& dy, double t) const {
    p->eval_v(t, v.data());
    const std::size_t dim = 2 * n;
    const cplx i(0.0, 1.0);
    for (std::size_t c = 0; c < cols; ++c) {
      const cplx* col = &y[c * dim];
      cplx* out = &dy[c * dim];
      for (std::size_t j = 0; j < n; ++j) {
        cplx top = z * col[j];
        cplx bot = z * col[n + j];
        const cplx* vj = &v[j * n];
        for (std::size_t k = 0; k < n; ++k) {
          top -= vj[k] * col[n + k];
          bot -= std::conj(vj[k]) * col[k];
        }
        out[j] = i * top;
        out[n + j] = -i * bot;
      }
    }
    if (derivative) {
      for (std::size_t c = dim; c < cols; ++c) {
        const cplx* psi = &y[(c - dim) * dim];
        cplx* out = &dy[c * dim];
        for (std::size_t j = 0; j < n; ++j) {
          out[j] += i * psi[j];
          out[n + j] -= i * psi[n + j];
        }
      }
    }
  }
};

// Local error relative to the largest entry of the state, so that decaying
// columns and the initially zero derivative block are judged against the
// size of the whole solution.
class NormRelativeChecker {
 public:
  explicit NormRelativeChecker(double rtol) : rtol_(rtol) {}

  template <class Algebra, class St, class Deriv, class Err, class Time>
  double error(Algebra&, const St& x_old, const Deriv&, Err& x_err, Time) const {
    double scale = 0.0, err = 0.0;
    for (std::size_t k = 0; k < x_old.size(); ++k) {
      scale = std::max(scale, std::abs(x_old[k]));
      err = std::max(err, std::abs(x_err[k]));
    }
    return err / (rtol_ * std::max(scale, 1e-300));
  }

 private:
  double rtol_;
};

using Stepper = ode::runge_kutta_fehlberg78<State, double, State, double, ode::range_algebra>;
using Controlled = ode::controlled_runge_kutta<Stepper, NormRelativeChecker>;

void check_inputs(cplx z, double rtol) {
  if (!(rtol >= 1e-13 && rtol <= 1e-6)) throw InvalidInput("integrate: rtol must lie in [1e-13, 1e-6]");
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) throw InvalidInput("integrate: z must be finite");
  if (std::abs(z.imag()) > kMaxImZ) throw InvalidInput("integrate: |Im z| exceeds 60");
}

std::size_t run(const PeriodicPotential& p, cplx z, double rtol, bool derivative, State& y) {
  const std::size_t n = p.n();
  const std::size_t dim = 2 * n;
  const std::size_t cols = derivative ? 2 * dim : dim;
  y.assign(dim * cols, cplx(0.0));
  for (std::size_t k = 0; k < dim; ++k) y[k * dim + k] = 1.0;

  Rhs rhs{&p, z, n, cols, derivative, std::vector<cplx>(n * n)};
  Controlled stepper{NormRelativeChecker(rtol)};

  double t = 0.0;
  double dt = std::min(0.1, 1.0 / (1.0 + std::abs(z) + p.sup_bound()));
  std::size_t steps = 0;
  while (t < 1.0) {
    dt = std::min(dt, 1.0 - t);
    const double t_before = t;
    const auto res = stepper.try_step(rhs, y, t, dt);
    if (res == ode::success) {
      ++steps;
      if (t >= 1.0 - 1e-15) t = 1.0;
    } else if (t == t_before && dt < 1e-13) {
      throw IntegrationFailure("integrate: step size underflow", t);
    }
  }
  return steps;
}

CMatrix block(const State& y, std::size_t dim, std::size_t first_col) {
  CMatrix m(dim, dim);
  for (std::size_t c = 0; c < dim; ++c) {
    for (std::size_t r = 0; r < dim; ++r) m(r, c) = y[(first_col + c) * dim + r];
  }
  return m;
}

MonodromyResult finish(const CMatrix& psi, cplx z, std::size_t steps, std::size_t n) {
  MonodromyResult out;
  out.z = z;
  out.psi1 = psi;
  out.steps = steps;
  out.det_defect = std::abs(Eigen::PartialPivLU<CMatrix>(psi).determinant() - 1.0);
  const CMatrix j = j_matrix(n);
  const CMatrix inv = -j * psi.transpose() * j;
  out.symplectic_defect = norm_max(psi * inv - CMatrix::Identity(2 * n, 2 * n));
  out.valid = all_finite(psi) && out.det_defect <= det_defect_envelope(z) &&
              out.symplectic_defect <= symplectic_defect_envelope(z);
  return out;
}

}  // namespace

double det_defect_envelope(cplx z) { return 1e-9 * std::exp(std::abs(z.imag())); }
double symplectic_defect_envelope(cplx z) { return 1e-8 * std::exp(2.0 * std::abs(z.imag())); }

MonodromyResult integrate(const PeriodicPotential& p, cplx z, double rtol) {
  check_inputs(z, rtol);
  State y;
  const std::size_t steps = run(p, z, rtol, false, y);
  return finish(block(y, p.dim(), 0), z, steps, p.n());
}

MonodromyDerivative integrate_with_derivative(const PeriodicPotential& p, cplx z, double rtol) {
  check_inputs(z, rtol);
  State y;
  const std::size_t steps = run(p, z, rtol, true, y);
  const std::size_t dim = p.dim();
  return {finish(block(y, dim, 0), z, steps, p.n()), block(y, dim, dim)};
}

// --- series ----------------------------------------------------------------

namespace {

constexpr int kPanels = 128;
constexpr int kNodes = 16;

double legendre(int j, double x) {
  if (j == 0) return 1.0;
  double p0 = 1.0, p1 = x;
  for (int k = 1; k < j; ++k) {
    const double p2 = ((2.0 * k + 1.0) * x * p1 - k * p0) / (k + 1.0);
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

struct Quadrature {
  Eigen::VectorXd x;   // Chebyshev-Lobatto nodes on [-1, 1]
  Eigen::MatrixXd s;   // s(k, j) = integral from -1 to x_k of the j-th Lagrange basis
};

const Quadrature& panel_rule() {
  static const Quadrature rule = [] {
    Quadrature q;
    q.x.resize(kNodes);
    for (int k = 0; k < kNodes; ++k) q.x(k) = -std::cos(kPi * k / (kNodes - 1));
    Eigen::MatrixXd vand(kNodes, kNodes), w(kNodes, kNodes);
    for (int k = 0; k < kNodes; ++k) {
      for (int j = 0; j < kNodes; ++j) {
        vand(k, j) = legendre(j, q.x(k));
        w(k, j) = (j == 0) ? q.x(k) + 1.0
                           : (legendre(j + 1, q.x(k)) - legendre(j - 1, q.x(k))) / (2.0 * j + 1.0);
      }
    }
    q.s = w * vand.inverse();
    return q;
  }();
  return rule;
}

}  // namespace

SeriesResult series_psi(const PeriodicPotential& p, cplx z, int order) {
  if (order < 0 || order > 12) throw InvalidInput("series_psi: order must lie in [0, 12]");
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) throw InvalidInput("series_psi: z must be finite");
  const auto n = static_cast<Eigen::Index>(p.n());
  const Eigen::Index dim = 2 * n;
  const Quadrature& rule = panel_rule();
  const double half = 0.5 / kPanels;
  const int total = kPanels * kNodes;
  const cplx i(0.0, 1.0);

  // A(s) = -i J1 V_s e^{2izsJ1} at every node; also accumulate int |V_s| ds.
  std::vector<CMatrix> a(total);
  double v_abs_integral = 0.0;
  const CMatrix j1 = j1_matrix(p.n());
  for (int pnl = 0; pnl < kPanels; ++pnl) {
    const double left = static_cast<double>(pnl) / kPanels;
    for (int k = 0; k < kNodes; ++k) {
      const double s = left + half * (rule.x(k) + 1.0);
      CMatrix m = -i * j1 * p.V_at(s);
      const cplx up = std::exp(2.0 * i * z * s), down = std::exp(-2.0 * i * z * s);
      m.leftCols(n) *= up;
      m.rightCols(n) *= down;
      a[pnl * kNodes + k] = std::move(m);
      const double vs = p.is_zero() ? 0.0 : Eigen::JacobiSVD<CMatrix>(p.v_at(s)).singularValues()(0);
      v_abs_integral += half * rule.s(kNodes - 1, k) * vs;
    }
  }

  CMatrix e_end = CMatrix::Zero(dim, dim);
  e_end.topLeftCorner(n, n) = std::exp(i * z) * CMatrix::Identity(n, n);
  e_end.bottomRightCorner(n, n) = std::exp(-i * z) * CMatrix::Identity(n, n);

  SeriesResult out;
  std::vector<CMatrix> prev(total, CMatrix::Identity(dim, dim));
  out.terms.push_back(e_end);
  std::vector<CMatrix> f(kNodes), cur(total);
  for (int order_n = 1; order_n <= order; ++order_n) {
    CMatrix start = CMatrix::Zero(dim, dim);
    for (int pnl = 0; pnl < kPanels; ++pnl) {
      for (int k = 0; k < kNodes; ++k) f[k] = a[pnl * kNodes + k] * prev[pnl * kNodes + k];
      for (int k = 0; k < kNodes; ++k) {
        CMatrix acc = start;
        for (int j = 0; j < kNodes; ++j) acc += (half * rule.s(k, j)) * f[j];
        cur[pnl * kNodes + k] = std::move(acc);
      }
      start = cur[pnl * kNodes + kNodes - 1];
    }
    out.terms.push_back(e_end * start);
    std::swap(prev, cur);
  }

  out.partial_sum = CMatrix::Zero(dim, dim);
  for (const auto& t : out.terms) out.partial_sum += t;
  const double vnorm = std::sqrt(p.norm2());
  out.error_bound = std::pow(vnorm, order + 1) / std::tgamma(order + 2.0) *
                    std::exp(std::abs(z.imag()) + v_abs_integral);
  return out;
}

std::pair<TraceSample, TraceSample> traces_from(const CMatrix& psi1) {
  return {TraceSample{1, psi1.trace()}, TraceSample{2, (psi1 * psi1).trace()}};
}

std::pair<TraceSample, TraceSample> traces(const PeriodicPotential& p, cplx z, double rtol) {
  return traces_from(integrate(p, z, rtol).psi1);
}

}  // namespace floquet
