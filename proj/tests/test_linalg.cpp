#include <doctest.h>

#include <algorithm>
#include <random>

#include "floquet/linalg.hpp"
#include "oracles.hpp"

using namespace floquet;

namespace {

CMatrix random_matrix(std::mt19937& rng, int n) {
  std::normal_distribution<double> g(0.0, 1.0);
  CMatrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = cplx(g(rng), g(rng));
  return a;
}

std::vector<cplx> sorted(std::vector<cplx> v) {
  std::sort(v.begin(), v.end(), [](cplx a, cplx b) { return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag(); });
  return v;
}

}  // namespace

TEST_CASE("eigenvalues of identity and diagonal matrices") {
  const EigenSet id = eigenvalues(CMatrix::Identity(4, 4));
  REQUIRE(id.values.size() == 4);
  for (const cplx& v : id.values) CHECK(std::abs(v - 1.0) < 1e-14);

  CMatrix d = CMatrix::Zero(3, 3);
  d(0, 0) = 1.0;
  d(1, 1) = 2.0;
  d(2, 2) = 3.0;
  const auto vals = sorted(eigenvalues(d).values);
  CHECK(vals[0] == cplx(1.0));
  CHECK(vals[1] == cplx(2.0));
  CHECK(vals[2] == cplx(3.0));
}

TEST_CASE("companion matrix of a unimodular quadratic") {
  CMatrix c(2, 2);
  c << 0.0, -1.0, 1.0, 2.0 * std::cos(0.7);
  const auto vals = eigenvalues(c).values;
  REQUIRE(vals.size() == 2);
  const cplx r1 = std::polar(1.0, 0.7), r2 = std::polar(1.0, -0.7);
  for (const cplx& v : vals) CHECK(std::min(std::abs(v - r1), std::abs(v - r2)) < 1e-12);
  CHECK(std::abs(vals[0] - vals[1]) > 1.0);
}

TEST_CASE("eigenvector residual and unitary spectra") {
  std::mt19937 rng(11);
  for (int n : {2, 5, 8, 16, 32}) {
    const CMatrix a = random_matrix(rng, n);
    const EigenSet es = eigenvalues(a, true);
    CHECK(es.values.size() == static_cast<std::size_t>(n));
    CHECK(es.residual < 1e-10);
    const Eigen::HouseholderQR<CMatrix> qr(random_matrix(rng, n));
    const CMatrix u = qr.householderQ();
    for (const cplx& v : eigenvalues(u).values) CHECK(std::abs(std::abs(v) - 1.0) < 1e-10);
  }
}

TEST_CASE("mat_exp examples") {
  CHECK(norm_max(mat_exp(CMatrix::Zero(4, 4)) - CMatrix::Identity(4, 4)) == 0.0);

  const double theta = 0.83;
  const CMatrix e = mat_exp(cplx(0.0, theta) * j1_matrix(3));
  CMatrix expected = CMatrix::Zero(6, 6);
  for (int k = 0; k < 3; ++k) {
    expected(k, k) = std::polar(1.0, theta);
    expected(k + 3, k + 3) = std::polar(1.0, -theta);
  }
  CHECK(norm_max(e - expected) < 1e-14);

  // A0 = j (z - a j2) with j = [[0,1],[-1,0]] and j2 = [[0,1],[1,0]].
  const double a = 1.0, z = 2.0;
  CMatrix jj(2, 2), j2(2, 2);
  jj << 0.0, 1.0, -1.0, 0.0;
  j2 << 0.0, 1.0, 1.0, 0.0;
  const CMatrix a0 = jj * (z * CMatrix::Identity(2, 2) - a * j2);
  const double k = std::sqrt(3.0);
  const CMatrix closed = std::cos(k) * CMatrix::Identity(2, 2) - (std::sin(k) / k) * a0;
  CHECK(norm_max(mat_exp(-a0) - closed) < 1e-14);
}

TEST_CASE("mat_exp against a Taylor oracle and its inverse") {
  std::mt19937 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + trial % 7;
    CMatrix a = random_matrix(rng, n);
    const double target = 0.5 + 9.5 * trial / 19.0;
    a *= target / norm_op(a);
    const CMatrix e = mat_exp(a);
    const CMatrix ref = oracle::taylor_exp(a);
    CHECK(norm_op(e - ref) / norm_op(ref) < 1e-12);
    CHECK(norm_max(e * mat_exp(-a) - CMatrix::Identity(n, n)) < 1e-10);
  }
  // Larger norms keep the relative accuracy.
  CMatrix big = random_matrix(rng, 4);
  big *= 50.0 / norm_op(big);
  const CMatrix ref = oracle::taylor_exp(big);
  CHECK(norm_op(mat_exp(big) - ref) / norm_op(ref) < 1e-11);
}

TEST_CASE("mat_exp reports overflow") {
  CMatrix a = CMatrix::Identity(2, 2) * 1e4;
  CHECK_THROWS_AS(mat_exp(a), NumericalFailure);
}

TEST_CASE("det_inv examples") {
  const DetInv id = det_inv(CMatrix::Identity(3, 3));
  CHECK(id.det == cplx(1.0));
  REQUIRE(id.inverse);
  CHECK(norm_max(*id.inverse - CMatrix::Identity(3, 3)) == 0.0);

  CMatrix d = CMatrix::Zero(2, 2);
  d(0, 0) = 2.0;
  d(1, 1) = 3.0;
  const DetInv di = det_inv(d);
  CHECK(std::abs(di.det - 6.0) < 1e-15);
  REQUIRE(di.inverse);
  CHECK(std::abs((*di.inverse)(0, 0) - 0.5) < 1e-15);
  CHECK(std::abs((*di.inverse)(1, 1) - 1.0 / 3.0) < 1e-15);

  CMatrix sing = CMatrix::Ones(3, 3);
  const DetInv ds = det_inv(sing);
  CHECK(!ds.inverse);
  CHECK(std::abs(ds.det) < 1e-14);
}

TEST_CASE("determinant equals the product of eigenvalues") {
  std::mt19937 rng(5);
  for (int n = 2; n <= 16; ++n) {
    for (int trial = 0; trial < 3; ++trial) {
      CMatrix a = random_matrix(rng, n) + 3.0 * CMatrix::Identity(n, n);
      Eigen::JacobiSVD<CMatrix> svd(a);
      const double cond = svd.singularValues()(0) / svd.singularValues()(n - 1);
      if (cond > 1e6) continue;
      const DetInv di = det_inv(a);
      cplx prod = 1.0;
      for (const cplx& v : eigenvalues(a).values) prod *= v;
      CHECK(std::abs(di.det - prod) / std::abs(prod) < (n == 6 ? 1e-9 : 1e-8));
      REQUIRE(di.inverse);
      CHECK(norm_max(a * *di.inverse - CMatrix::Identity(n, n)) < 1e-10);
    }
  }
}

TEST_CASE("hermitian_eigen sorts and rejects non-Hermitian input") {
  CMatrix h(2, 2);
  h << 2.0, cplx(0.0, 1.0), cplx(0.0, -1.0), 2.0;
  const HermitianEigen he = hermitian_eigen(h);
  CHECK(std::abs(he.values(0) - 1.0) < 1e-14);
  CHECK(std::abs(he.values(1) - 3.0) < 1e-14);
  CMatrix bad = h;
  bad(0, 1) = 5.0;
  CHECK_THROWS_AS(hermitian_eigen(bad), InvalidInput);
}

TEST_CASE("structure matrices") {
  const CMatrix J = j_matrix(2), J1 = j1_matrix(2), J2 = j2_matrix(2);
  CHECK(norm_max(J * J + CMatrix::Identity(4, 4)) == 0.0);
  CHECK(norm_max(J1 * J1 - CMatrix::Identity(4, 4)) == 0.0);
  CHECK(norm_max(J2 * J2 - CMatrix::Identity(4, 4)) == 0.0);
  // U J U = -i J1 for U = (J1 + i J) / sqrt 2.
  const CMatrix U = (J1 + cplx(0.0, 1.0) * J) / std::sqrt(2.0);
  CHECK(norm_max(U * J * U + cplx(0.0, 1.0) * J1) < 1e-15);
}
