#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "approx/basin.hpp"
#include "approx/correction.hpp"
#include "approx/fields.hpp"

namespace approx {

class IsochronyError : public std::runtime_error {
 public:
  IsochronyError(double spread, double tol)
      : std::runtime_error("input manifold is not isochronous: relative period spread " +
                           std::to_string(spread) + " exceeds " + std::to_string(tol)) {}
};

struct TilingSpec {
  int k = 8;             // tile count
  double eps_t = 0.1;    // tangential (sink-creating) strength
  double axial_eps = 0.1;  // cylinder: axial tiling strength
  // Cylinder only: emulated base-approximation error, a z-dependent angular
  // rate modulation that de-tunes the tiled cycle periods before correction.
  double detune = 0.0;
};

struct TiledRing {
  VectorField field;
  std::vector<Vec> sinks;    // designed sink positions on the unit circle
  std::vector<Vec> saddles;
  double spacing = 0.0;      // manifold length / k
  bool normal_hyperbolicity_warning = false;  // eps_t*k >= 2*kappa
};

/// Adds the tangential term theta' -= eps_t * sin(k*theta) to a ring
/// attractor, creating k sinks at theta = 2*pi*j/k separated by k saddles.
TiledRing tile_ring(double kappa, const TilingSpec& spec);

struct TiledLine {
  VectorField field;
  std::vector<Vec> sinks;    // k sinks, endpoints included
  std::vector<Vec> saddles;  // k-1 interior saddles
  double spacing = 0.0;
  bool normal_hyperbolicity_warning = false;
};

/// Same pattern on a segment attractor [a, b] x {0}; end tiles are sinks and
/// the tiling term is windowed so no stray equilibria appear outside.
TiledLine tile_line(double a, double b, double kappa_t, double lambda_n, const TilingSpec& spec);

struct TiledCylinder {
  VectorField field;               // corrected tiled field
  VectorField uncorrected;         // tiled (and detuned) field before correction
  std::vector<double> z_levels;    // designed cycle heights
  std::vector<LimitCycle> cycles;  // located on the corrected field
  CorrectionResult correction;
  double spacing = 0.0;
  double isochrony_spread = 0.0;   // measured relative period spread of the input
  double common_period = 0.0;
};

/// Tiles the isochronous cylinder (axial term with k stable z-levels over
/// [z_lo, z_hi]), optionally detunes the cycle periods, then runs the
/// multiplicative period correction back to the common period 2*pi/omega.
/// Throws IsochronyError when the input manifold fails the isochrony check;
/// `freq_gradient` adds a z-dependent angular rate to the input manifold
/// (a non-isochronous foliation) to exercise exactly that failure.
TiledCylinder tile_iso_cylinder(double kappa, double omega, double z_lo, double z_hi,
                                const TilingSpec& spec, const IntegratorConfig& cfg,
                                double isochrony_tol = 1e-8, double freq_gradient = 0.0);

struct TilingReport {
  std::vector<double> displacements;  // resolved samples only
  double max_displacement = 0.0;
  double p99_displacement = 0.0;
  double spacing = 0.0;
  double fraction_exceeding_spacing = 0.0;
  int n_samples = 0;
  int n_unresolved = 0;
};

/// Asymptotic displacement between each sample's limit under the original
/// flow (a point on the continuum) and its limit under the tiled flow (the
/// captured sink or cycle).
TilingReport measure_dtype_error(const VectorField& original, const VectorField& tiled,
                                 const AttractorRegistry& tiled_registry, double spacing,
                                 const Domain& domain, const std::vector<Vec>& samples,
                                 const IntegratorConfig& cfg, double t_max, int jobs = 0);

/// Convergence of the original flow to its limit point (state movement below
/// tol over one unit of time); nullopt when no convergence by t_max.
std::optional<Vec> asymptotic_state(const VectorField& field, const Vec& x0,
                                    const IntegratorConfig& cfg, const Domain& domain,
                                    double t_max, double tol = 1e-9);

}  // namespace approx
