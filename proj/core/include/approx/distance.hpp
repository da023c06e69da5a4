#pragma once

#include "approx/integrate.hpp"
#include "approx/vector_field.hpp"

namespace approx {

struct SupDistanceResult {
  double sup = 0.0;        // max over the shared dense grid
  double horizon = 0.0;    // [0, horizon] actually compared
  bool escaped = false;    // either trajectory left the domain (sup = diameter)
  int grid_points = 0;     // final shared-grid resolution
};

/// Finite-horizon surrogate of the all-time trajectory deviation:
///   max over a shared dense grid on [0, T_max] of ||phi_A(t,x0) - phi_B(t,x0)||.
/// The grid is refined (doubled) until the max changes by < 1% between
/// refinements. If either trajectory escapes `domain`, the conservative value
/// domain.diameter() is reported instead.
SupDistanceResult sup_trajectory_distance(const VectorField& field_a, const VectorField& field_b,
                                          const Vec& x0, double t_max, const Domain& domain,
                                          const IntegratorConfig& cfg);

/// Same quantity evaluated on two already-integrated trajectories
/// over [0, min common horizon].
SupDistanceResult sup_grid_distance(const Trajectory& traj_a, const Trajectory& traj_b,
                                    double t_max, const Domain& domain);

struct C1Distance {
  double c0 = 0.0;  // sampled sup ||f - g||
  double c1 = 0.0;  // sampled sup ||Df - Dg||_op
};

/// Sampled lower bounds on the C^0/C^1 distances over low-discrepancy probe
/// points in `domain`. n_samples >= 100 required.
C1Distance c1_distance_estimate(const VectorField& field_a, const VectorField& field_b,
                                const Domain& domain, int n_samples, std::uint64_t seed = 0);

struct InwardCheck {
  bool inward = false;      // f . nu < -margin at every boundary sample
  double worst_dot = 0.0;   // largest observed f . nu (closest to violating)
};

/// Samples the box boundary densely and tests the strict inward-pointing
/// condition with velocity margin `gamma`.
InwardCheck check_inward_pointing(const VectorField& field, const Domain& domain, double gamma,
                                  int samples_per_face = 256);

}  // namespace approx
