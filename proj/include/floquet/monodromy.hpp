#pragma once

#include <complex>
#include <cstddef>
#include <utility>
#include <vector>

#include "floquet/linalg.hpp"
#include "floquet/potential.hpp"

namespace floquet {

inline constexpr double kDefaultRtol = 1e-12;
inline constexpr double kMaxImZ = 60.0;

struct MonodromyResult {
  cplx z;
  CMatrix psi1;                   // psi(1, z)
  double det_defect = 0.0;        // |det psi - 1|
  double symplectic_defect = 0.0; // max entry of psi (-J psi^T J) - I
  std::size_t steps = 0;
  bool valid = true;              // both defects inside their envelopes
};

struct MonodromyDerivative {
  MonodromyResult result;
  CMatrix dpsi1;  // d psi(1, z) / dz
};

/// Thrown when the step size collapses; carries the last t reached.
class IntegrationFailure : public NumericalFailure {
 public:
  IntegrationFailure(const std::string& what, double t_reached)
      : NumericalFailure(what), t_reached_(t_reached) {}
  double t_reached() const noexcept { return t_reached_; }

 private:
  double t_reached_;
};

/// psi' = i J1 (z - V_t) psi on [0, 1], psi(0) = I, by an adaptive embedded
/// Runge-Kutta 7(8) pair with norm-relative local error control.
MonodromyResult integrate(const PeriodicPotential& p, cplx z, double rtol = kDefaultRtol);

/// Integrates the variational system for d psi / dz alongside psi.
MonodromyDerivative integrate_with_derivative(const PeriodicPotential& p, cplx z, double rtol = kDefaultRtol);

struct SeriesResult {
  CMatrix partial_sum;          // sum_{n <= order} psi_n(1, z)
  std::vector<CMatrix> terms;   // psi_n(1, z), n = 0..order
  double error_bound = 0.0;     // ||V||^{order+1} / (order+1)! * exp(|Im z| + int |V_s| ds)
};

/// Power series in the potential: psi_n(t) = e^{iztJ1} phi_n(t) with
/// phi_n(t) = -i int_0^t J1 V_s e^{2izsJ1} phi_{n-1}(s) ds.
SeriesResult series_psi(const PeriodicPotential& p, cplx z, int order);

struct TraceSample {
  int m = 1;
  cplx value;  // tr psi(m, z)
};

/// T1 = tr psi(1, z) and T2 = tr psi(1, z)^2.
std::pair<TraceSample, TraceSample> traces(const PeriodicPotential& p, cplx z, double rtol = kDefaultRtol);
std::pair<TraceSample, TraceSample> traces_from(const CMatrix& psi1);

/// Defect envelopes used for the validity flag.
double det_defect_envelope(cplx z);
double symplectic_defect_envelope(cplx z);

}  // namespace floquet
