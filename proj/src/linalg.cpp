#include "floquet/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <unsupported/Eigen/MatrixFunctions>

namespace floquet {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

void require_square(const CMatrix& a, const char* who) {
  if (a.rows() == 0 || a.rows() != a.cols()) {
    throw InvalidInput(std::string(who) + ": matrix must be square and non-empty");
  }
  if (!all_finite(a)) {
    throw InvalidInput(std::string(who) + ": matrix has non-finite entries");
  }
}

}  // namespace

CMatrix j1_matrix(std::size_t n) {
  const auto m = static_cast<Eigen::Index>(n);
  CMatrix j = CMatrix::Identity(2 * m, 2 * m);
  j.bottomRightCorner(m, m) *= -1.0;
  return j;
}

CMatrix j_matrix(std::size_t n) {
  const auto m = static_cast<Eigen::Index>(n);
  CMatrix j = CMatrix::Zero(2 * m, 2 * m);
  j.topRightCorner(m, m).setIdentity();
  j.bottomLeftCorner(m, m) = -CMatrix::Identity(m, m);
  return j;
}

CMatrix j2_matrix(std::size_t n) {
  const auto m = static_cast<Eigen::Index>(n);
  CMatrix j = CMatrix::Zero(2 * m, 2 * m);
  j.topRightCorner(m, m).setIdentity();
  j.bottomLeftCorner(m, m).setIdentity();
  return j;
}

double norm_max(const CMatrix& a) {
  return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
}

double norm_op(const CMatrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<CMatrix> svd(a);
  return svd.singularValues()(0);
}

bool all_finite(const CMatrix& a) {
  for (Eigen::Index k = 0; k < a.size(); ++k) {
    const cplx v = a.data()[k];
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
  }
  return true;
}

EigenSet eigenvalues(const CMatrix& a, bool want_vectors) {
  require_square(a, "eigenvalues");
  const Eigen::Index n = a.rows();
  Eigen::ComplexEigenSolver<CMatrix> solver(a, true);
  if (solver.info() != Eigen::Success) {
    // Rerun the Schur step alone so the partially deflated diagonal can be reported.
    Eigen::ComplexSchur<CMatrix> schur(a, false);
    std::vector<cplx> partial;
    const CMatrix& t = schur.matrixT();
    for (Eigen::Index k = 0; k < t.rows(); ++k) partial.push_back(t(k, k));
    throw EigenFailure("eigenvalues: QR iteration did not converge", std::move(partial));
  }

  std::vector<cplx> values(solver.eigenvalues().data(), solver.eigenvalues().data() + n);
  CMatrix vectors = solver.eigenvectors();
  const double scale = std::max(1.0, norm_op(a));
  const CMatrix eye = CMatrix::Identity(n, n);

  // One Newton step on det(A - lambda I): lambda += 1 / tr((A - lambda I)^-1).
  // Kept only if it is small against the distance to the other eigenvalues
  // and it lowers |det(A - lambda I)|.
  for (Eigen::Index k = 0; k < n; ++k) {
    double gap = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j != k) gap = std::min(gap, std::abs(values[j] - values[k]));
    }
    Eigen::PartialPivLU<CMatrix> lu(a - values[k] * eye);
    const cplx det0 = lu.determinant();
    if (det0 == cplx(0.0)) continue;
    const cplx tr = lu.inverse().trace();
    if (!std::isfinite(std::abs(tr)) || tr == cplx(0.0)) continue;
    const cplx step = 1.0 / tr;
    if (std::abs(step) >= 0.1 * gap || std::abs(step) > std::sqrt(kEps) * scale) continue;
    const cplx cand = values[k] + step;
    const cplx det1 = Eigen::PartialPivLU<CMatrix>(a - cand * eye).determinant();
    if (std::abs(det1) < std::abs(det0)) values[k] = cand;
  }

  double residual = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    CVector x = vectors.col(k);
    const double nx = x.norm();
    if (nx > 0.0) x /= nx;
    vectors.col(k) = x;
    residual = std::max(residual, (a * x - values[k] * x).norm() / scale);
  }

  EigenSet out;
  out.values = std::move(values);
  out.residual = residual;
  if (want_vectors) out.vectors = std::move(vectors);
  return out;
}

CMatrix mat_exp(const CMatrix& a) {
  require_square(a, "mat_exp");
  CMatrix e = a.exp();
  if (!all_finite(e)) throw NumericalFailure("mat_exp: result overflowed");
  return e;
}

DetInv det_inv(const CMatrix& a) {
  require_square(a, "det_inv");
  const Eigen::Index n = a.rows();
  Eigen::PartialPivLU<CMatrix> lu(a);
  DetInv out;
  out.det = lu.determinant();
  const double anorm = a.cwiseAbs().rowwise().sum().maxCoeff();
  double min_pivot = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < n; ++k) {
    min_pivot = std::min(min_pivot, std::abs(lu.matrixLU()(k, k)));
  }
  if (min_pivot > static_cast<double>(n) * kEps * anorm) out.inverse = lu.inverse();
  return out;
}

HermitianEigen hermitian_eigen(const CMatrix& a) {
  require_square(a, "hermitian_eigen");
  const double defect = norm_max(a - a.adjoint());
  if (defect > 1e-10 * std::max(1.0, norm_max(a))) {
    throw InvalidInput("hermitian_eigen: matrix is not Hermitian");
  }
  const CMatrix h = 0.5 * (a + a.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(h);
  if (solver.info() != Eigen::Success) {
    throw NumericalFailure("hermitian_eigen: iteration did not converge");
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

}  // namespace floquet
