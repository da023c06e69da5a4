#pragma once

#include <complex>
#include <vector>

#include "approx/vector_field.hpp"

namespace approx {

enum class FixedPointKind { Stable, Saddle, Unstable, NonHyperbolic };

struct FixedPoint {
  Vec location;
  std::vector<std::complex<double>> eigenvalues;
  FixedPointKind kind = FixedPointKind::NonHyperbolic;
  double residual = 0.0;  // ||f(location)||
};

const char* to_string(FixedPointKind kind);

struct NewtonOptions {
  double root_tol = 1e-10;     // accept when ||f(x)|| below this
  double step_cap = 0.5;       // max Newton step, in units of domain extent
  int max_iters = 50;
  double hyperbolicity_tol = 1e-6;  // |Re(eig)| below this => non-hyperbolic
  double dedup_factor = 10.0;       // roots closer than factor*root_tol merge
};

/// Newton iteration from every seed; converged roots are deduplicated and
/// classified by the eigenvalues of the Jacobian. Divergent seeds are
/// skipped silently; a singular Jacobian at a root flags it non-hyperbolic.
std::vector<FixedPoint> find_fixed_points(const VectorField& field, const Domain& domain,
                                          const std::vector<Vec>& seeds,
                                          const NewtonOptions& opts = {});

/// Uniform seed grid convenience (per-axis count `per_axis`).
std::vector<FixedPoint> find_fixed_points(const VectorField& field, const Domain& domain,
                                          int per_axis = 8, const NewtonOptions& opts = {});

/// Slowest contraction rate min |Re(eig)| of a stable fixed point.
/// Throws if the point is not stable.
double spectral_gap(const FixedPoint& fp);

/// Eigenvalue-based classification with the given dead-band.
FixedPointKind classify_eigenvalues(const std::vector<std::complex<double>>& eigs,
                                    double hyperbolicity_tol);

}  // namespace approx
