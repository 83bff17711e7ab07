#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "floquet/lyapunov.hpp"
#include "oracles.hpp"

using namespace floquet;

namespace {

cplx kz(double a, cplx z) { return std::sqrt(z * z - a * a); }

double set_distance(std::vector<cplx> a, std::vector<cplx> b) {
  double worst = 0.0;
  for (const cplx& x : a) {
    double best = 1e300;
    for (const cplx& y : b) best = std::min(best, std::abs(x - y));
    worst = std::max(worst, best);
  }
  return worst;
}

}  // namespace

TEST_CASE("free case") {
  const cplx z = 1.3;
  const LyapunovSample s = sample(PeriodicPotential::zero(3), z);
  REQUIRE(s.multipliers.size() == 3);
  for (const auto& [t, tp] : s.multipliers) {
    CHECK(std::min(std::abs(t - std::exp(cplx(0, 1) * z)), std::abs(t - std::exp(cplx(0, -1) * z))) < 1e-10);
    CHECK(std::abs(t * tp - 1.0) < 1e-10);
  }
  for (const cplx& d : s.deltas) CHECK(std::abs(d - std::cos(z)) < 1e-10);
  CHECK(std::abs(s.rho) < 1e-18);
  CHECK(std::abs(discriminant(integrate(PeriodicPotential::zero(3), z).psi1)) < 1e-18);
}

TEST_CASE("unperturbed example branches") {
  const PeriodicPotential p = PeriodicPotential::example_4x4(1.0, 0.0, 0.05);
  const cplx z = 2.0;
  const LyapunovSample s = sample(p, z);
  REQUIRE(s.deltas.size() == 2);
  const cplx d1 = std::cos(kz(1.0, z)), d2 = std::cos(z);
  CHECK(set_distance(s.deltas, {d1, d2}) < 1e-10);
  const cplx rho = (d1 - d2) * (d1 - d2);
  CHECK(std::abs(s.rho - rho) < 1e-10);
  CHECK(std::abs(rho_n2(p, z) - rho) < 1e-10);

  const cplx z3 = 3.0;
  const cplx r3 = std::pow(std::cos(std::sqrt(8.0)) - std::cos(3.0), 2);
  CHECK(std::abs(rho_n2(p, z3) - r3) < 1e-10);
  CHECK(std::abs(discriminant(integrate(p, z3).psi1) - r3) < 1e-10);
}

TEST_CASE("free discriminant from the trace form") {
  for (double z : {0.3, 2.2, 5.0}) CHECK(std::abs(rho_n2(PeriodicPotential::zero(2), z)) < 1e-11);
  CHECK_THROWS_AS(rho_n2(PeriodicPotential::zero(3), 1.0), InvalidInput);
}

TEST_CASE("small coupling moves rho at the crossing quadratically") {
  const double a = 7.0;
  const double r1 = kPi + a * a / (4 * kPi);
  const cplx r_small = rho_n2(PeriodicPotential::example_4x4(a, 0.025, 0.05), r1);
  const cplx r_large = rho_n2(PeriodicPotential::example_4x4(a, 0.05, 0.05), r1);
  CHECK(std::abs(r_large) < 0.05 * 0.05 * 10.0);
  const double ratio = std::abs(r_large) / std::abs(r_small);
  CHECK(ratio > 3.0);
  CHECK(ratio < 5.0);
}

TEST_CASE("sample invariants on random potentials") {
  std::mt19937 rng(41);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 12; ++trial) {
    const std::size_t n = 1 + trial % 3;
    const PeriodicPotential p = oracle::random_potential(rng, n, 1 + trial % 2, 1.0 + trial % 3);
    const cplx z(8.0 * u(rng), 1.5 * u(rng));
    const LyapunovSample s = sample(p, z);
    const double ey = std::exp(std::abs(z.imag()));
    CHECK(s.deltas.size() == n);
    CHECK(s.pairing_ok);
    for (const auto& [t, tp] : s.multipliers) {
      const cplx d = (t + 1.0 / t) / 2.0;
      double best = 1e300;
      for (const cplx& x : s.deltas) best = std::min(best, std::abs(x - d));
      CHECK(best <= 1e-6 * ey);
    }
    // Discriminant as a product over the deduplicated values.
    cplx prod = 1.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) prod *= (s.deltas[i] - s.deltas[j]) * (s.deltas[i] - s.deltas[j]);
    CHECK(std::abs(s.rho - prod) <= 1e-8 * std::max(1.0, std::abs(prod)));
    const cplx hankel = discriminant(integrate(p, z).psi1);
    CHECK(std::abs(hankel - prod) <= 1e-6 * std::pow(ey, 2.0 * (n - 1)) * std::max(1.0, std::abs(prod)));
    if (n == 2) CHECK(std::abs(rho_n2(p, z) - s.rho) <= 1e-6 * ey * ey);

    // Conjugation symmetry.
    const LyapunovSample sc = sample(p, std::conj(z));
    std::vector<cplx> conj_deltas;
    for (const cplx& x : s.deltas) conj_deltas.push_back(std::conj(x));
    CHECK(set_distance(sc.deltas, conj_deltas) <= 1e-8 * ey);
  }
}

TEST_CASE("discriminant derivative") {
  std::mt19937 rng(43);
  const PeriodicPotential p = oracle::random_potential(rng, 3, 1, 2.0);
  const cplx z(2.5, 0.2);
  const double h = 1e-5;
  const MonodromyDerivative d = integrate_with_derivative(p, z);
  const DiscriminantValue dv = discriminant(d.result.psi1, d.dpsi1);
  const cplx fd = (discriminant(integrate(p, z + h).psi1) - discriminant(integrate(p, z - h).psi1)) / (2 * h);
  CHECK(std::abs(dv.derivative - fd) < 1e-6 * std::max(1.0, std::abs(fd)));
  CHECK(std::abs(dv.value - discriminant(d.result.psi1)) < 1e-14 * std::max(1.0, std::abs(dv.value)));
}

TEST_CASE("branches approach cos z at large z") {
  std::mt19937 rng(44);
  const PeriodicPotential p = oracle::random_potential(rng, 2, 2, 1.0);
  for (double z = 50.0; z <= 60.0; z += 1.0) {
    const LyapunovSample s = sample(p, z);
    for (const cplx& d : s.deltas) CHECK(std::abs(d - std::cos(z)) <= 0.2);
  }
}

TEST_CASE("free track is degenerate without crashing") {
  std::vector<cplx> contour;
  for (int k = 0; k <= 100; ++k) contour.emplace_back(10.0 * k / 100.0);
  const BranchTrack t = track(PeriodicPotential::zero(2), contour);
  CHECK(t.values.size() == contour.size());
  CHECK(t.collision_cells.size() == contour.size() - 1);
  for (std::size_t i = 0; i < contour.size(); ++i)
    for (const cplx& d : t.values[i]) CHECK(std::abs(d - std::cos(contour[i])) < 1e-10);
}

TEST_CASE("unperturbed example track follows the closed-form branches") {
  const PeriodicPotential p = PeriodicPotential::example_4x4(1.0, 0.0, 0.05);
  std::vector<cplx> contour;
  const int m = 350;
  for (int k = 0; k <= m; ++k) contour.emplace_back(0.5 + 5.5 * k / m);
  const BranchTrack t = track(p, contour);
  REQUIRE(t.values.size() == contour.size());
  // Continuous branch 0 is one closed form on the whole contour.
  const bool first_is_k = std::abs(t.values[0][0] - std::cos(kz(1.0, contour[0]))) < 1e-8;
  double worst = 0.0;
  for (std::size_t i = 0; i < contour.size(); ++i) {
    const cplx z = contour[i];
    const cplx dk = std::cos(kz(1.0, z)), dz = std::cos(z);
    worst = std::max(worst, std::abs(t.values[i][0] - (first_is_k ? dk : dz)));
    worst = std::max(worst, std::abs(t.values[i][1] - (first_is_k ? dz : dk)));
  }
  CHECK(worst < 1e-8);
  // The crossing near r_1 = pi + 1 / (4 pi).
  const double r1 = kPi + 1.0 / (4 * kPi);
  bool crossing_marked = false;
  for (std::size_t c : t.collision_cells) {
    if (std::abs(contour[c].real() - r1) < 0.05) crossing_marked = true;
  }
  CHECK((crossing_marked || t.subdivisions > 0));
}

TEST_CASE("diagonal potential branches near pi n") {
  const PeriodicPotential p = PeriodicPotential::diagonal({1.0, 2.0});
  const int n = 6;
  std::vector<cplx> contour;
  const double step = kPi / 200.0;
  for (double z = kPi * n - 1.0; z <= kPi * n + 1.0 + 1e-12; z += step) contour.emplace_back(z);
  const BranchTrack t = track(p, contour);
  for (std::size_t i = 0; i < contour.size(); ++i) {
    const double z = contour[i].real();
    std::vector<cplx> expected{std::cos(z - 1.0 / (2 * z)), std::cos(z - 4.0 / (2 * z))};
    CHECK(set_distance(t.values[i], expected) < 0.01);
  }
  // Strict monotonicity of each separated branch inside (-1, 1).
  for (int j = 0; j < 2; ++j) {
    int sign = 0;
    bool monotone = true;
    for (std::size_t i = 1; i < contour.size(); ++i) {
      const double a = t.values[i - 1][j].real(), b = t.values[i][j].real();
      if (std::max(std::abs(a), std::abs(b)) >= 1.0 - 1e-3) {
        sign = 0;
        continue;
      }
      const int s = (b > a) ? 1 : -1;
      if (sign != 0 && s != sign) monotone = false;
      sign = s;
    }
    CHECK(monotone);
  }
}
