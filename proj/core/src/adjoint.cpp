#include "approx/adjoint.hpp"

#include <cmath>
#include <complex>
#include <limits>

namespace approx {

AdjointSolution adjoint_solution(const VectorField& field, const LimitCycle& cycle,
                                 const IntegratorConfig& cfg, double unit_tol) {
  const int n = field.dimension();

  // Periodic initial condition: eigenvector of M^T for eigenvalue 1.
  Eigen::MatrixXd mt = Eigen::MatrixXd(cycle.monodromy).transpose();
  Eigen::EigenSolver<Eigen::MatrixXd> solver(mt, true);
  int unit_count = 0;
  int unit_index = -1;
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    const double d = std::abs(solver.eigenvalues()[i] - std::complex<double>(1.0, 0.0));
    if (d < unit_tol) ++unit_count;
    if (d < best) {
      best = d;
      unit_index = i;
    }
  }
  if (unit_count != 1) throw DegenerateAdjointError(unit_count);

  Eigen::VectorXcd vc = solver.eigenvectors().col(unit_index);
  // Rotate the complex phase away (the eigenvalue is real, so the eigenvector
  // can be chosen real).
  int pivot = 0;
  for (int i = 1; i < n; ++i)
    if (std::abs(vc[i]) > std::abs(vc[pivot])) pivot = i;
  vc /= vc[pivot];
  Vec z0(n);
  for (int i = 0; i < n; ++i) z0[i] = vc[i].real();

  // Normalize against the field at the anchor.
  const Vec f0 = field(cycle.anchor);
  const double pairing = z0.dot(f0);
  if (std::abs(pairing) < 1e-14)
    throw DegenerateAdjointError(unit_count);  // eigenvector orthogonal to the flow
  z0 /= pairing;

  // Integrate [x; z] with z' = -Df(x)^T z along the orbit.
  VectorField augmented(
      2 * n,
      [&field, n](const Vec& s) {
        const Vec x = s.head(n);
        const Vec z = s.tail(n);
        Vec out(2 * n);
        out.head(n) = field(x);
        out.tail(n) = Vec(-field.jacobian(x).transpose() * z);
        return out;
      },
      nullptr, "adjoint");

  Vec s0(2 * n);
  s0.head(n) = cycle.anchor;
  s0.tail(n) = z0;
  IntegratorConfig acfg = cfg;
  acfg.guard.reset();
  if (!field.has_analytic_jacobian()) {
    // Finite-difference Jacobian noise caps the usable tolerance.
    acfg.rtol = std::max(acfg.rtol, 3e-8);
    acfg.atol = std::max(acfg.atol, 1e-10);
  }
  const Trajectory traj = integrate(augmented, s0, 0.0, cycle.period, acfg);

  AdjointSolution adj;
  adj.times = cycle.times;
  adj.z.resize(cycle.times.size());
  adj.f_on_orbit.resize(cycle.times.size());
  for (std::size_t i = 0; i < cycle.times.size(); ++i) {
    const Vec s = traj.at(cycle.times[i]);
    adj.z[i] = s.tail(n);
    adj.f_on_orbit[i] = field(cycle.points[i]);
    adj.normalization_residual =
        std::max(adj.normalization_residual, std::abs(adj.z[i].dot(adj.f_on_orbit[i]) - 1.0));
    adj.max_norm = std::max(adj.max_norm, adj.z[i].norm());
  }
  const Vec z_end = traj.last_state().tail(n);
  adj.periodicity_residual = (z_end - z0).norm() / z0.norm();
  return adj;
}

PeriodSensitivity period_sensitivity(const LimitCycle& cycle, const AdjointSolution& adjoint,
                                     const VectorField& g) {
  const std::size_t k = adjoint.times.size();
  if (k != cycle.points.size() || k < 8)
    throw std::invalid_argument("period_sensitivity: adjoint/cycle grids disagree");

  // Periodic integrand on a uniform grid: the trapezoid rule reduces to the
  // sample mean times the period, and halved sampling gives the Richardson
  // error estimate.
  auto quad = [&](std::size_t stride) {
    double acc = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < k; i += stride) {
      acc += adjoint.z[i].dot(g(cycle.points[i]));
      ++count;
    }
    return -(acc / static_cast<double>(count)) * cycle.period;
  };

  PeriodSensitivity out;
  out.value = quad(1);
  out.quad_error = std::abs(out.value - quad(2));
  return out;
}

}  // namespace approx
