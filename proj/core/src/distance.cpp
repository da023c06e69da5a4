#include "approx/distance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "approx/sampling.hpp"

namespace approx {

SupDistanceResult sup_grid_distance(const Trajectory& traj_a, const Trajectory& traj_b,
                                    double t_max, const Domain& domain) {
  SupDistanceResult out;
  if (traj_a.reason() == StopReason::EscapedDomain || traj_b.reason() == StopReason::EscapedDomain) {
    out.sup = domain.diameter();
    out.escaped = true;
    out.horizon = std::min(traj_a.t_end(), traj_b.t_end());
    return out;
  }
  const double t0 = std::max(traj_a.t_begin(), traj_b.t_begin());
  const double t1 = std::min({traj_a.t_end(), traj_b.t_end(), t0 + t_max});
  out.horizon = t1 - t0;

  int m = 256;
  double prev = -1.0;
  for (int round = 0; round < 8; ++round) {
    double sup = 0.0;
    for (int k = 0; k <= m; ++k) {
      const double t = t0 + (t1 - t0) * (static_cast<double>(k) / m);
      sup = std::max(sup, (traj_a.at(t) - traj_b.at(t)).norm());
    }
    out.sup = sup;
    out.grid_points = m + 1;
    if (prev >= 0.0 && sup <= 1.01 * prev && sup >= 0.99 * prev) break;
    if (prev >= 0.0 && sup == 0.0 && prev == 0.0) break;
    prev = sup;
    m *= 2;
  }
  return out;
}

SupDistanceResult sup_trajectory_distance(const VectorField& field_a, const VectorField& field_b,
                                          const Vec& x0, double t_max, const Domain& domain,
                                          const IntegratorConfig& cfg) {
  if (field_a.dimension() != field_b.dimension())
    throw std::invalid_argument("sup_trajectory_distance: dimension mismatch");
  IntegratorConfig guarded = cfg;
  if (!guarded.guard) guarded.guard = domain.inflated(1e-9 * domain.extent());
  const Trajectory ta = integrate(field_a, x0, 0.0, t_max, guarded);
  const Trajectory tb = integrate(field_b, x0, 0.0, t_max, guarded);
  return sup_grid_distance(ta, tb, t_max, domain);
}

C1Distance c1_distance_estimate(const VectorField& field_a, const VectorField& field_b,
                                const Domain& domain, int n_samples, std::uint64_t seed) {
  if (n_samples < 100) throw std::invalid_argument("c1_distance_estimate: n_samples >= 100");
  C1Distance d;
  SamplerSpec spec{SamplerKind::LowDiscrepancy, n_samples, seed};
  for (const Vec& x : sample_domain(domain, spec)) {
    d.c0 = std::max(d.c0, (field_a(x) - field_b(x)).norm());
    d.c1 = std::max(d.c1, operator_norm(Mat(field_a.jacobian(x) - field_b.jacobian(x))));
  }
  return d;
}

InwardCheck check_inward_pointing(const VectorField& field, const Domain& domain, double gamma,
                                  int samples_per_face) {
  if (!(gamma > 0.0)) throw std::invalid_argument("check_inward_pointing: gamma must be positive");
  const int dim = domain.dimension();
  InwardCheck out;
  out.worst_dot = -std::numeric_limits<double>::infinity();

  for (int axis = 0; axis < dim; ++axis) {
    for (int side = 0; side < 2; ++side) {
      const double face_coord = side == 0 ? domain.lo[axis] : domain.hi[axis];
      const double normal_sign = side == 0 ? -1.0 : 1.0;  // outward normal along +-axis
      const int n_face = dim == 1 ? 1 : samples_per_face;
      for (int k = 0; k < n_face; ++k) {
        Vec x(dim);
        x[axis] = face_coord;
        if (dim > 1) {
          // Low-discrepancy point in the remaining coordinates of the face.
          Vec u = low_discrepancy_point(dim - 1, 0x0face + axis * 2 + side, k);
          int j = 0;
          for (int d = 0; d < dim; ++d) {
            if (d == axis) continue;
            x[d] = domain.lo[d] + (domain.hi[d] - domain.lo[d]) * u[j++];
          }
        }
        const double dot = normal_sign * field(x)[axis];
        out.worst_dot = std::max(out.worst_dot, dot);
      }
    }
  }
  out.inward = out.worst_dot < -gamma;
  return out;
}

}  // namespace approx
