#pragma once

#include <stdexcept>
#include <vector>

#include "approx/cycles.hpp"

namespace approx {

class DegenerateAdjointError : public std::runtime_error {
 public:
  explicit DegenerateAdjointError(int unit_count)
      : std::runtime_error("transposed monodromy has " + std::to_string(unit_count) +
                           " unit eigenvalues; adjoint direction is not unique") {}
};

/// Periodic solution Z(t) of z' = -Df(gamma(t))^T z, normalized so that
/// <Z(t), f(gamma(t))> == 1 along the orbit. Z pairs with a perturbation
/// direction to give the first-order period response.
struct AdjointSolution {
  std::vector<double> times;   // same uniform grid as the cycle samples
  std::vector<Vec> z;          // Z(t) at those times
  std::vector<Vec> f_on_orbit; // f(gamma(t)) at those times
  double normalization_residual = 0.0;  // max_t |<Z,f> - 1|
  double periodicity_residual = 0.0;    // ||Z(T) - Z(0)|| / ||Z(0)||
  double max_norm = 0.0;                // sup_t ||Z(t)||, the C_Z ingredient

  const AdjointSolution& self() const { return *this; }
};

/// Builds the periodic adjoint by taking the unit-eigenvalue eigenvector of
/// the transposed monodromy as initial condition, then integrating along the
/// orbit. Throws DegenerateAdjointError if the unit eigenspace is not
/// one-dimensional within tolerance.
AdjointSolution adjoint_solution(const VectorField& field, const LimitCycle& cycle,
                                 const IntegratorConfig& cfg, double unit_tol = 1e-6);

struct PeriodSensitivity {
  double value = 0.0;      // dT/d(alpha) for the perturbation f + alpha*g
  double quad_error = 0.0; // Richardson estimate of the quadrature error
};

/// First-order period response  dT/dalpha = -integral <Z(t), g(gamma(t))> dt
/// by composite trapezoid on the cycle's uniform time grid.
PeriodSensitivity period_sensitivity(const LimitCycle& cycle, const AdjointSolution& adjoint,
                                     const VectorField& g);

}  // namespace approx
