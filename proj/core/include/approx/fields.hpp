#pragma once

#include <map>
#include <string>
#include <vector>

#include "approx/vector_field.hpp"

namespace approx {

// ---------------------------------------------------------------------------
// Concrete target systems. All analytic, with analytic Jacobians.
// ---------------------------------------------------------------------------

/// 1D double well, f(x) = x - x^3 on [-2, 2]. Stable equilibria at +-1
/// (eigenvalue -2 each), saddle at 0 (eigenvalue +1), max |f'| = 11.
VectorField double_well_field();
Domain double_well_domain();

/// 1D perturbation direction g(x) = -cos(2x).
VectorField neg_cos_2x_field();

/// Planar limit-cycle system in polar form:
///   r' = kappa * r * (1 - r^2),  theta' = omega * (1 + beta*(r - 1)).
/// The unit circle (translated to `center`) is a hyperbolic attracting cycle
/// of period 2*pi/omega with nontrivial Floquet multiplier exp(-2*kappa*T).
VectorField radial_cycle_field(double kappa = 1.0, double omega = 1.0, double beta = 0.0,
                               Vec center = Vec());

/// N translated radial-cycle copies, each active inside its own disc
/// (C^2 cutoff), so tubular neighborhoods of the cycles are disjoint.
struct MultiCycleSpec {
  std::vector<Vec> centers;
  double kappa = 1.0;
  double omega = 1.0;
  double beta = 0.0;
  double disc_r_in = 1.8;   // cutoff plateau radius around each center
  double disc_r_out = 2.4;  // cutoff support radius
};
VectorField multi_cycle_field(const MultiCycleSpec& spec);
/// Two copies centered at (+-2.5, 0); min inter-cycle distance 3.
MultiCycleSpec multi_cycle_2_spec();
/// Min distance between the unit cycles of two copies.
double multi_cycle_separation(const MultiCycleSpec& spec);

/// Ring attractor: r' = kappa*r*(1-r^2), theta' = 0. Every point of the unit
/// circle is an equilibrium with radial eigenvalue -2*kappa and tangential 0.
VectorField ring_attractor_field(double kappa = 1.0);

/// Planar line attractor: equilibrium segment [a,b] x {0}, normal contraction
/// rate lambda_n, C^2 cubic hinge pulling back onto the segment tangentially.
VectorField line_attractor_field(double a = -1.0, double b = 1.0, double kappa_t = 1.0,
                                 double lambda_n = 2.0);

enum class AxialMode {
  None,    // z' = 0: cylinder r=1 is a continuum of period 2*pi/omega cycles
  Linear,  // z' = -mu*z: single hyperbolic cycle at z = 0
};

/// 3D isochronous cylinder: planar radial cycle (beta = 0) in (x, y) with a
/// common angular rate, plus the chosen axial behavior.
VectorField iso_cylinder_field(double kappa = 1.0, double omega = 1.0,
                               AxialMode mode = AxialMode::None, double mu = 1.0);

// ---------------------------------------------------------------------------
// Field combinators.
// ---------------------------------------------------------------------------

/// Pointwise f + nu*g.
VectorField make_perturbed(const VectorField& base, const VectorField& g, double nu);

/// c * f for c > 0: orbits unchanged as sets, all periods divided by c.
VectorField scale_field(const VectorField& field, double c);

/// Base field plus an amplitude-nu perturbation direction with recorded
/// norms. Evaluating at nu = 0 reproduces the base bit-exactly.
struct PerturbationFamily {
  VectorField base;
  VectorField g;
  double nu = 0.0;
  double g_c0_norm = 0.0;  // measured sup ||g||
  double g_c1_norm = 0.0;  // measured sup ||g|| + sup ||Dg||_op

  // The C0 part of the classical bound is enforced (sup||g|| <= 1); the
  // full C1 norm is recorded but not rejected, since the canonical
  // perturbation direction -cos(2x) has C1 norm 3.
  static PerturbationFamily make(const VectorField& base, const VectorField& g, double nu,
                                 const Domain& domain, int n_probe = 512);

  VectorField field() const { return make_perturbed(base, g, nu); }
};

/// String-id field lookup for config files. Known ids: "double-well",
/// "radial-cycle", "multi-cycle-2", "ring", "line", "iso-cylinder".
/// Unknown parameter keys are rejected.
VectorField make_field(const std::string& id, const std::map<std::string, double>& params = {});
/// Natural experiment domain for a field id.
Domain default_domain(const std::string& id);

}  // namespace approx
