#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "floquet/errors.hpp"

namespace floquet {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

inline constexpr double kPi = 3.14159265358979323846;

/// diag(I_N, -I_N)
CMatrix j1_matrix(std::size_t n);
/// [[0, I_N], [-I_N, 0]]
CMatrix j_matrix(std::size_t n);
/// [[0, I_N], [I_N, 0]]
CMatrix j2_matrix(std::size_t n);

/// Largest entry modulus.
double norm_max(const CMatrix& a);
/// Operator 2-norm via singular values.
double norm_op(const CMatrix& a);
bool all_finite(const CMatrix& a);

struct EigenSet {
  std::vector<cplx> values;
  /// Column k is a unit eigenvector for values[k]; empty unless requested.
  CMatrix vectors;
  /// max_k ||A x_k - lambda_k x_k|| / max(1, ||A||) when vectors are requested,
  /// otherwise the relative trace/determinant consistency of the spectrum.
  double residual = 0.0;
};

/// Carries whatever the iteration produced before it gave up.
class EigenFailure : public NumericalFailure {
 public:
  EigenFailure(const std::string& what, std::vector<cplx> partial)
      : NumericalFailure(what), partial_(std::move(partial)) {}
  const std::vector<cplx>& partial() const noexcept { return partial_; }

 private:
  std::vector<cplx> partial_;
};

/// Eigenvalues of a square complex matrix, each Newton-polished once on
/// det(A - lambda I) when that strictly improves the estimate.
EigenSet eigenvalues(const CMatrix& a, bool want_vectors = false);

/// exp(A) by scaling and squaring; throws NumericalFailure on overflow.
CMatrix mat_exp(const CMatrix& a);

struct DetInv {
  cplx det;
  /// Empty when a pivot falls below n * eps * ||A||.
  std::optional<CMatrix> inverse;
};

DetInv det_inv(const CMatrix& a);

struct HermitianEigen {
  Eigen::VectorXd values;  // ascending
  CMatrix vectors;         // unitary, columns match values
};

/// Requires a Hermitian input (checked to 1e-10 relative).
HermitianEigen hermitian_eigen(const CMatrix& a);

}  // namespace floquet
