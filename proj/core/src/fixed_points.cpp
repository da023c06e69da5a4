#include "approx/fixed_points.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "approx/sampling.hpp"

namespace approx {

const char* to_string(FixedPointKind kind) {
  switch (kind) {
    case FixedPointKind::Stable: return "stable";
    case FixedPointKind::Saddle: return "saddle";
    case FixedPointKind::Unstable: return "unstable";
    case FixedPointKind::NonHyperbolic: return "non-hyperbolic";
  }
  return "?";
}

FixedPointKind classify_eigenvalues(const std::vector<std::complex<double>>& eigs,
                                    double hyperbolicity_tol) {
  bool any_dead = false, any_pos = false, any_neg = false;
  for (const auto& mu : eigs) {
    const double re = mu.real();
    if (std::abs(re) < hyperbolicity_tol)
      any_dead = true;
    else if (re > 0)
      any_pos = true;
    else
      any_neg = true;
  }
  if (any_dead) return FixedPointKind::NonHyperbolic;
  if (any_pos && any_neg) return FixedPointKind::Saddle;
  if (any_pos) return FixedPointKind::Unstable;
  return FixedPointKind::Stable;
}

namespace {

std::vector<std::complex<double>> jacobian_eigenvalues(const Mat& jac) {
  Eigen::EigenSolver<Eigen::MatrixXd> solver(Eigen::MatrixXd(jac), false);
  std::vector<std::complex<double>> eigs(static_cast<std::size_t>(jac.rows()));
  for (Eigen::Index i = 0; i < jac.rows(); ++i) eigs[static_cast<std::size_t>(i)] = solver.eigenvalues()[i];
  // Deterministic order: by real part, then imaginary.
  std::sort(eigs.begin(), eigs.end(), [](const auto& a, const auto& b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  return eigs;
}

}  // namespace

std::vector<FixedPoint> find_fixed_points(const VectorField& field, const Domain& domain,
                                          const std::vector<Vec>& seeds,
                                          const NewtonOptions& opts) {
  if (seeds.empty()) throw std::invalid_argument("find_fixed_points: empty seed grid");
  const double step_cap = opts.step_cap * domain.extent();
  std::vector<FixedPoint> roots;

  for (const Vec& seed : seeds) {
    Vec x = seed;
    bool converged = false;
    bool singular = false;
    for (int it = 0; it < opts.max_iters; ++it) {
      const Vec fx = field(x);
      if (fx.norm() < opts.root_tol) {
        converged = true;
        break;
      }
      const Mat jac = field.jacobian(x);
      Eigen::FullPivLU<Eigen::MatrixXd> lu((Eigen::MatrixXd(jac)));
      if (!lu.isInvertible()) {
        // Singular Jacobian: fall back to a pseudo-inverse step; if we are
        // already at a root the classification below flags it.
        singular = true;
        const Vec step = Vec(jac.completeOrthogonalDecomposition().solve(fx));
        if (step.norm() < opts.root_tol) {
          converged = field(x).norm() < 10 * opts.root_tol;
          break;
        }
        x -= step.norm() > step_cap ? Vec(step * (step_cap / step.norm())) : step;
        continue;
      }
      Vec step = Vec(lu.solve(Eigen::MatrixXd(fx)));
      if (step.norm() > step_cap) step *= step_cap / step.norm();
      x -= step;
      if (!x.allFinite()) break;
      // Newton wandering far outside the domain counts as divergence.
      if (!domain.inflated(domain.extent()).contains(x)) break;
    }
    if (!converged || !domain.contains(x)) continue;

    const double merge_tol = opts.dedup_factor * opts.root_tol;
    bool duplicate = false;
    for (const FixedPoint& r : roots)
      if ((r.location - x).norm() < merge_tol) {
        duplicate = true;
        break;
      }
    if (duplicate) continue;

    FixedPoint fp;
    fp.location = x;
    fp.residual = field(x).norm();
    fp.eigenvalues = jacobian_eigenvalues(field.jacobian(x));
    fp.kind = classify_eigenvalues(fp.eigenvalues, opts.hyperbolicity_tol);
    if (singular && fp.kind != FixedPointKind::NonHyperbolic) fp.kind = FixedPointKind::NonHyperbolic;
    roots.push_back(std::move(fp));
  }

  // Deterministic report order: lexicographic by location.
  std::sort(roots.begin(), roots.end(), [](const FixedPoint& a, const FixedPoint& b) {
    for (Eigen::Index i = 0; i < a.location.size(); ++i)
      if (a.location[i] != b.location[i]) return a.location[i] < b.location[i];
    return false;
  });
  return roots;
}

std::vector<FixedPoint> find_fixed_points(const VectorField& field, const Domain& domain,
                                          int per_axis, const NewtonOptions& opts) {
  SamplerSpec spec{SamplerKind::Grid, 1, 0};
  int n = 1;
  for (int d = 0; d < domain.dimension(); ++d) n *= per_axis;
  spec.n = n;
  return find_fixed_points(field, domain, sample_domain(domain, spec), opts);
}

double spectral_gap(const FixedPoint& fp) {
  if (fp.kind != FixedPointKind::Stable)
    throw std::invalid_argument("spectral_gap: fixed point is not stable");
  double gap = std::numeric_limits<double>::infinity();
  for (const auto& mu : fp.eigenvalues) gap = std::min(gap, std::abs(mu.real()));
  return gap;
}

}  // namespace approx
