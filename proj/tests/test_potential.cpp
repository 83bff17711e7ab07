#include <doctest.h>

#include <cmath>
#include <random>

#include "floquet/potential.hpp"
#include "oracles.hpp"

using namespace floquet;

namespace {

const cplx I(0.0, 1.0);

// Real-valued trig polynomial: c_{-m} = conj(c_m).
TrigPoly random_real(std::mt19937& rng, int degree) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<cplx> c(2 * degree + 1);
  c[degree] = g(rng);
  for (int m = 1; m <= degree; ++m) {
    c[degree + m] = cplx(g(rng), g(rng));
    c[degree - m] = std::conj(c[degree + m]);
  }
  return TrigPoly(degree, c);
}


}  // namespace

TEST_CASE("builtin potentials") {
  const PeriodicPotential z = PeriodicPotential::zero(2);
  CHECK(z.is_zero());
  CHECK(z.norm2() == 0.0);
  CHECK(norm_max(z.V_at(0.3)) == 0.0);

  CMatrix v0(1, 1);
  v0(0, 0) = 1.5;
  CHECK(std::abs(PeriodicPotential::constant(v0).norm2() - 2.0 * 1.5 * 1.5) < 1e-15);

  const PeriodicPotential ex = PeriodicPotential::example_4x4(7.0, 0.0, 0.05);
  CHECK(ex.degree() == 0);
  CMatrix expected = CMatrix::Zero(2, 2);
  expected(0, 0) = -7.0;
  for (double t : {0.0, 0.25, 0.5, 0.9}) CHECK(norm_max(ex.v_at(t) - expected) == 0.0);
  // nu is inert at tau = 0
  CHECK(norm_max(PeriodicPotential::example_4x4(7.0, 0.0, 0.1).v_at(0.4) - ex.v_at(0.4)) == 0.0);
}

TEST_CASE("asymmetric and non-finite input is rejected") {
  std::vector<TrigPoly> e(4);
  e[1] = TrigPoly::constant(1.0);
  CHECK_THROWS_WITH_AS(PeriodicPotential(2, e), doctest::Contains("(1,2)"), InvalidInput);
  CHECK_THROWS_AS(TrigPoly(0, {cplx(std::nan(""), 0.0)}), InvalidInput);
  CHECK_THROWS_AS(TrigPoly(1, {cplx(1.0)}), InvalidInput);
}

TEST_CASE("periodized Gaussian has unit mass and is centred at one half") {
  for (double nu : {0.02, 0.05, 0.2}) {
    const TrigPoly b = periodized_gaussian(nu);
    CHECK(b.degree() == static_cast<int>(std::ceil(6.0 / nu)));
    CHECK(std::abs(b.coeff(0) - 1.0) < 1e-14);
    CHECK(b(0.5).real() > b(0.4).real());
    CHECK(std::abs(b(0.5 + 0.1).real() - b(0.5 - 0.1).real()) < 1e-12);
    CHECK(std::abs(b(0.3).imag()) < 1e-12);
    // Direct sum of Gaussians on the circle.
    double direct = 0.0;
    for (int k = -3; k <= 3; ++k) {
      const double d = 0.47 - 0.5 + k;
      direct += std::exp(-d * d / (2 * nu * nu)) / (nu * std::sqrt(2 * kPi));
    }
    CHECK(std::abs(b(0.47).real() - direct) < 1e-8 * direct);
  }
}

TEST_CASE("V is self-adjoint and Parseval holds") {
  std::mt19937 rng(21);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 1 + trial % 3;
    const PeriodicPotential p = oracle::random_potential(rng, n, 1 + trial % 4, 0.5 + trial);
    for (double t : {0.0, 0.13, 0.5, 0.77}) {
      const CMatrix V = p.V_at(t);
      CHECK(norm_max(V - V.adjoint()) == 0.0);
    }
    const int nodes = 10 * (p.degree() + 1) * 4;
    const double quad = oracle::periodic_mean([&](double t) { return (p.V_at(t) * p.V_at(t)).trace().real(); }, nodes);
    CHECK(std::abs(quad - p.norm2()) < 1e-12 * std::max(1.0, p.norm2()));
    for (int m = p.degree() + 1; m < p.degree() + 4; ++m) {
      CHECK(norm_max(fourier_data(p, m).Vhat_prime) == 0.0);
      CHECK(norm_max(fourier_data(p, -m).Vhat_prime) == 0.0);
    }
  }
}

TEST_CASE("moments examples") {
  const PotentialMoments z = moments(PeriodicPotential::zero(3));
  CHECK(z.nu.cwiseAbs().maxCoeff() == 0.0);
  CHECK(z.h0 == 0.0);
  CHECK(z.h1 == 0.0);
  CHECK(z.h2 == 0.0);

  const double a = 1.7;
  const PotentialMoments d = moments(PeriodicPotential::diagonal({a, 0.0}));
  CHECK(std::abs(d.nu(0)) < 1e-14);
  CHECK(std::abs(d.nu(1) - a * a) < 1e-13);
  CHECK(std::abs(d.h0 - 2 * a * a) < 1e-13);
  CHECK(std::abs(d.h1) < 1e-13);
  CHECK(std::abs(d.h2 - 2 * std::pow(a, 4)) < 1e-12);

  // v(t) = cos(2 pi t)
  const PeriodicPotential c(1, {TrigPoly(1, {0.5, 0.0, 0.5})});
  const PotentialMoments m = moments(c);
  CHECK(std::abs(m.nu(0) - 0.5) < 1e-14);
  CHECK(std::abs(m.h0 - 1.0) < 1e-14);
  CHECK(std::abs(m.h1) < 1e-14);
}

TEST_CASE("moments against quadrature") {
  std::mt19937 rng(8);
  for (int trial = 0; trial < 6; ++trial) {
    const std::size_t n = 1 + trial % 3;
    const PeriodicPotential p = oracle::random_potential(rng, n, 1 + trial % 3, 1.0 + trial);
    const PotentialMoments mo = moments(p);
    const int nodes = 40 * (p.degree() + 1);
    const CMatrix J1 = oracle::j1(n);
    const CMatrix calV =
        oracle::periodic_mean([&](double t) { return CMatrix(p.V_at(t) * p.V_at(t)); }, nodes);
    CHECK(norm_max(calV - mo.calV) < 1e-12 * (1.0 + mo.h0));
    const double h1 = oracle::periodic_mean(
        [&](double t) { return (-I * J1 * p.dV_at(t) * p.V_at(t)).trace().real(); }, nodes);
    const double h2 = oracle::periodic_mean(
        [&](double t) {
          const CMatrix V = p.V_at(t), dV = p.dV_at(t);
          return (dV * dV + V * V * V * V).trace().real();
        },
        nodes);
    CHECK(std::abs(mo.h0 - p.norm2()) < 1e-12 * (1.0 + mo.h0));
    CHECK(std::abs(mo.h1 - h1) < 1e-10 * (1.0 + std::abs(h1)));
    CHECK(std::abs(mo.h2 - h2) < 1e-10 * (1.0 + std::abs(h2)));
    for (Eigen::Index j = 0; j < mo.nu.size(); ++j) CHECK(mo.nu(j) >= -1e-12);
  }
}

TEST_CASE("dV matches a finite difference") {
  std::mt19937 rng(2);
  const PeriodicPotential p = oracle::random_potential(rng, 2, 3, 2.0);
  const double h = 1e-5;
  for (double t : {0.1, 0.6}) {
    const CMatrix fd = (p.V_at(t + h) - p.V_at(t - h)) / (2 * h);
    CHECK(norm_max(fd - p.dV_at(t)) < 1e-6 * (1.0 + norm_max(p.dV_at(t))));
  }
}

TEST_CASE("fourier_data examples") {
  CMatrix v0(2, 2);
  v0 << 1.0, 2.0, 2.0, 3.0;
  const PeriodicPotential c = PeriodicPotential::constant(v0);
  for (int n = -3; n <= 3; ++n) CHECK(norm_max(fourier_data(c, n).Vhat_prime) == 0.0);

  const PeriodicPotential single(1, {TrigPoly(1, {0.0, 0.0, 1.0})});
  CHECK(std::abs(fourier_data(single, 1).vhat_prime(0, 0) - cplx(0.0, 2 * kPi)) < 1e-14);
  for (int n : {-2, -1, 0, 2, 3}) CHECK(std::abs(fourier_data(single, n).vhat_prime(0, 0)) == 0.0);

  const PeriodicPotential ex = PeriodicPotential::example_4x4(7.0, 0.1, 0.05);
  for (int n : {1, 2, 5}) {
    // Quadrature oracle for the coefficient of b_nu and of v'.
    const int nodes = 4096;
    const cplx bhat = oracle::periodic_mean(
        [&](double t) {
          double s = 0.0;
          for (int k = -2; k <= 2; ++k) {
            const double d = t - 0.5 + k;
            s += std::exp(-d * d / (2 * 0.05 * 0.05)) / (0.05 * std::sqrt(2 * kPi));
          }
          return cplx(s) * std::polar(1.0, -2 * kPi * n * t);
        },
        nodes);
    const cplx expected = -0.1 * (I * 2.0 * kPi * static_cast<double>(n)) * bhat;
    const FourierData fd = fourier_data(ex, n);
    CHECK(std::abs(fd.vhat_prime(0, 1) - expected) < 1e-9);
    const cplx direct = oracle::periodic_mean(
        [&](double t) { return cplx(ex.dV_at(t)(0, 3)) * std::polar(1.0, -2 * kPi * n * t); }, nodes);
    CHECK(std::abs(fd.vhat_prime(0, 1) - direct) < 1e-9);
    // block structure: V hat is [[0, v], [v^*, 0]]
    CHECK(norm_max(fd.Vhat_prime.topLeftCorner(2, 2)) == 0.0);
    CHECK(norm_max(fd.Vhat_prime.bottomRightCorner(2, 2)) == 0.0);
  }
}

TEST_CASE("normalize examples") {
  OmegaPair zero{2, std::vector<TrigPoly>(4), std::vector<TrigPoly>(4)};
  const NormalizedPotential nz = normalize(zero);
  CHECK(nz.potential.is_zero());
  CHECK(norm_max(nz.calE * nz.calE.adjoint() - CMatrix::Identity(4, 4)) < 1e-14);

  // omega = diag(1, 2) from Omega_2 = -diag(1, 2), Omega_1 = 0
  OmegaPair diag{2, std::vector<TrigPoly>(4), std::vector<TrigPoly>(4)};
  diag.omega2[0] = TrigPoly::constant(-1.0);
  diag.omega2[3] = TrigPoly::constant(-2.0);
  const NormalizedPotential nd = normalize(diag);
  const PotentialMoments md = moments(nd.potential);
  CHECK(std::abs(md.nu(0) - 1.0) < 1e-13);
  CHECK(std::abs(md.nu(1) - 4.0) < 1e-13);
  const CMatrix E = nd.calE.topLeftCorner(2, 2);
  CHECK(std::abs(E(0, 1)) < 1e-14);
  CHECK(std::abs(E(1, 0)) < 1e-14);
  CHECK(std::abs(std::abs(E(0, 0)) - 1.0) < 1e-14);

  std::mt19937 rng(17);
  for (int trial = 0; trial < 5; ++trial) {
    OmegaPair om{2, std::vector<TrigPoly>(4), std::vector<TrigPoly>(4)};
    for (auto* part : {&om.omega1, &om.omega2}) {
      (*part)[0] = random_real(rng, 2);
      (*part)[3] = random_real(rng, 2);
      (*part)[1] = random_real(rng, 2);
      (*part)[2] = (*part)[1];
    }
    const NormalizedPotential np = normalize(om);
    const PeriodicPotential& p = np.potential;
    const CMatrix calV =
        oracle::periodic_mean([&](double t) { return CMatrix(p.V_at(t) * p.V_at(t)); }, 64);
    CMatrix off = calV;
    for (int k = 0; k < 4; ++k) off(k, k) = 0.0;
    CHECK(norm_max(off) < 1e-10);
    const PotentialMoments mo = moments(p);
    CMatrix expected = CMatrix::Zero(4, 4);
    for (int k = 0; k < 2; ++k) expected(k, k) = expected(k + 2, k + 2) = mo.nu(k);
    // up to ordering of nu along the diagonal
    Eigen::VectorXd d = calV.diagonal().real().head(2);
    std::sort(d.data(), d.data() + 2);
    CHECK(std::abs(d(0) - mo.nu(0)) < 1e-10);
    CHECK(std::abs(d(1) - mo.nu(1)) < 1e-10);
    CHECK(norm_max(calV.topLeftCorner(2, 2) - calV.bottomRightCorner(2, 2)) < 1e-10);
  }
}

TEST_CASE("potential files round-trip bit-exactly") {
  std::mt19937 rng(4);
  const PeriodicPotential p = oracle::random_potential(rng, 3, 2, 1.3);
  const PeriodicPotential q = parse_potential(format_potential(p));
  REQUIRE(q.n() == 3);
  for (std::size_t j = 0; j < 3; ++j)
    for (std::size_t k = 0; k < 3; ++k) CHECK(p.entry(j, k) == q.entry(j, k));

  const PeriodicPotential ex = parse_potential("builtin = example_4x4\na = 7\ntau = 0.02\nnu = 0.05\n");
  CHECK(norm_max(ex.v_at(0.3) - PeriodicPotential::example_4x4(7, 0.02, 0.05).v_at(0.3)) == 0.0);
  const PeriodicPotential ex2 = parse_potential(format_potential(ex));
  CHECK(norm_max(ex2.v_at(0.3) - ex.v_at(0.3)) == 0.0);

  const PeriodicPotential d = parse_potential("N = 2\nbuiltin = diagonal\nvalues = 1 (2, 0.5)\n");
  CHECK(d.entry(1, 1).coeff(0) == cplx(2.0, 0.5));

  const PeriodicPotential half = parse_potential("N = 2\nv[1][2] = (1, 0.5, 0)\n");
  CHECK(half.entry(1, 0) == half.entry(0, 1));

  CHECK_THROWS_AS(parse_potential("N = 2\nv[1][2] = (0, 1, 0)\nv[2][1] = (0, 2, 0)\n"), InvalidInput);
  CHECK_THROWS_AS(parse_potential("N = 0\n"), InvalidInput);
  CHECK_THROWS_AS(parse_potential("N = 1\nbuiltin = nope\n"), InvalidInput);
  CHECK_THROWS_AS(parse_potential("N = 1\nv[1][1] = (0.5, 1, 0)\n"), InvalidInput);
}
