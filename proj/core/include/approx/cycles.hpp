#pragma once

#include <complex>
#include <stdexcept>
#include <vector>

#include "approx/integrate.hpp"
#include "approx/vector_field.hpp"

namespace approx {

/// Codimension-1 cross-section through `anchor` with unit `normal`.
/// Crossings count in the direction of positive <f, normal>.
struct PoincareSection {
  Vec anchor;
  Vec normal;

  PoincareSection() = default;
  PoincareSection(Vec anchor_, Vec normal_);

  double offset(const Vec& x) const { return normal.dot(x - anchor); }
};

class NonReturningError : public std::runtime_error {
 public:
  explicit NonReturningError(double t_max)
      : std::runtime_error("trajectory did not return to the section within t=" +
                           std::to_string(t_max)) {}
};

class CycleNewtonError : public std::runtime_error {
 public:
  CycleNewtonError(int iters, double residual)
      : std::runtime_error("return-map Newton stagnated after " + std::to_string(iters) +
                           " iterations (residual " + std::to_string(residual) + ")"),
        residual(residual) {}
  double residual;
};

struct ReturnResult {
  Vec point;
  double time = 0.0;
};

/// First return of the flow from `x` (on the section) back to the section in
/// the oriented direction. The crossing is refined on the dense output until
/// |offset| < 1e-10.
ReturnResult poincare_return(const VectorField& field, const PoincareSection& section,
                             const Vec& x, const IntegratorConfig& cfg, double t_max = 1e3);

/// Located periodic orbit.
struct LimitCycle {
  PoincareSection section;
  Vec anchor;                    // converged point on the section
  double period = 0.0;
  std::vector<double> times;     // uniform time grid over [0, period]
  std::vector<Vec> points;       // sampled orbit at `times`
  Mat monodromy;                 // fundamental matrix over one period
  std::vector<std::complex<double>> multipliers;
  bool hyperbolic = false;       // nontrivial multipliers off the unit circle
  double closure_error = 0.0;    // ||phi(T, anchor) - anchor||

  /// Index into `multipliers` of the trivial (flow-direction) multiplier.
  int trivial_multiplier_index() const;
  /// Slowest transverse contraction rate -log|mu|/T over stable nontrivial
  /// multipliers (0 when none contract).
  double contraction_rate() const;
  /// Minimum distance from x to the sampled orbit polyline.
  double distance_to_orbit(const Vec& x) const;
};

struct CycleSearchOptions {
  int max_newton_iters = 50;
  double residual_tol = 1e-10;   // section-coordinate Newton residual
  double hyperbolicity_tol = 1e-6;
  int orbit_samples = 512;       // >= 256 per contract
  double t_max_return = 1e3;
};

/// Newton on the section-restricted return map P(x) - x = 0 from `seed`.
/// On convergence the orbit is sampled uniformly in time and the monodromy
/// matrix and Floquet multipliers are computed.
LimitCycle find_limit_cycle(const VectorField& field, const PoincareSection& section,
                            const Vec& seed, const IntegratorConfig& cfg,
                            const CycleSearchOptions& opts = {});

/// Convenience: section through `seed` orthogonal to the flow there.
LimitCycle find_limit_cycle(const VectorField& field, const Vec& seed,
                            const IntegratorConfig& cfg, const CycleSearchOptions& opts = {});

struct MonodromyResult {
  Mat matrix;
  std::vector<std::complex<double>> multipliers;
};

/// Min distance from x to the closed polyline through `loop`; optionally
/// reports the nearest point.
double polyline_distance(const std::vector<Vec>& loop, const Vec& x, Vec* nearest = nullptr);

/// Symmetric Hausdorff distance between two sampled closed orbits.
double hausdorff_distance(const std::vector<Vec>& a, const std::vector<Vec>& b);

/// Integrates the variational equation U' = Df(phi(t,p)) U over one period.
MonodromyResult monodromy(const VectorField& field, const Vec& anchor, double period,
                          const IntegratorConfig& cfg);

}  // namespace approx
