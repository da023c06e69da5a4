#include "approx/cycles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace approx {

PoincareSection::PoincareSection(Vec anchor_, Vec normal_)
    : anchor(std::move(anchor_)), normal(std::move(normal_)) {
  const double n = normal.norm();
  if (n <= 0.0) throw std::invalid_argument("PoincareSection: zero normal");
  normal /= n;
}

namespace {

constexpr double kCrossingTol = 1e-10;

// Refine an oriented crossing bracketed by [t_lo, t_hi] on the dense output.
double refine_crossing(const Trajectory& traj, const PoincareSection& section, double t_lo,
                       double t_hi) {
  double g_lo = section.offset(traj.at(t_lo));
  for (int it = 0; it < 200; ++it) {
    const double tm = 0.5 * (t_lo + t_hi);
    const double gm = section.offset(traj.at(tm));
    if (std::abs(gm) < kCrossingTol || (t_hi - t_lo) < 1e-15 * std::max(1.0, std::abs(tm)))
      return tm;
    if ((g_lo < 0.0) == (gm < 0.0)) {
      t_lo = tm;
      g_lo = gm;
    } else {
      t_hi = tm;
    }
  }
  return 0.5 * (t_lo + t_hi);
}

}  // namespace

ReturnResult poincare_return(const VectorField& field, const PoincareSection& section,
                             const Vec& x, const IntegratorConfig& cfg, double t_max) {
  if (std::abs(section.normal.dot(field(x))) <= 0.0)
    throw std::invalid_argument("poincare_return: flow not transverse at start point");

  OdeStepper stepper(field, x, 0.0, cfg);
  std::size_t scanned = 1;  // node index already inspected
  double window = 1.0;
  // The start point usually sits on the section; arm crossing detection only
  // once the trajectory has visibly left it.
  bool lifted = std::abs(section.offset(x)) > 1e-6;

  while (stepper.t() < t_max && !stepper.stopped()) {
    stepper.advance_to(std::min(stepper.t() + window, t_max));
    const Trajectory& traj = stepper.trajectory();
    const auto& times = traj.times();
    for (; scanned < times.size(); ++scanned) {
      const double g0 = section.offset(traj.state(scanned - 1));
      const double g1 = section.offset(traj.state(scanned));
      if (!lifted) {
        if (std::abs(g1) > 1e-6) lifted = true;
        continue;
      }
      // Oriented crossing: offset passes from negative to nonnegative.
      if (g0 < 0.0 && g1 >= 0.0) {
        const double tc = refine_crossing(traj, section, times[scanned - 1], times[scanned]);
        ReturnResult out;
        out.time = tc;
        out.point = traj.at(tc);
        return out;
      }
    }
    window = std::min(window * 2.0, t_max / 8.0 + 1.0);
  }
  throw NonReturningError(t_max);
}

MonodromyResult monodromy(const VectorField& field, const Vec& anchor, double period,
                          const IntegratorConfig& cfg) {
  const int n = field.dimension();
  IntegratorConfig ecfg = cfg;
  if (!field.has_analytic_jacobian()) {
    // Central-difference Jacobians carry ~1e-8 absolute noise; error control
    // below that level rejects every step.
    ecfg.rtol = std::max(ecfg.rtol, 3e-8);
    ecfg.atol = std::max(ecfg.atol, 1e-10);
  }
  VectorField augmented(
      n + n * n,
      [&field, n](const Vec& s) {
        const Vec x = s.head(n);
        Mat u(n, n);
        for (int j = 0; j < n; ++j) u.col(j) = s.segment(n + j * n, n);
        const Mat du = field.jacobian(x) * u;
        Vec out(n + n * n);
        out.head(n) = field(x);
        for (int j = 0; j < n; ++j) out.segment(n + j * n, n) = du.col(j);
        return out;
      },
      nullptr, "variational");

  Vec s0 = Vec::Zero(n + n * n);
  s0.head(n) = anchor;
  for (int j = 0; j < n; ++j) s0[n + j * n + j] = 1.0;

  IntegratorConfig vcfg = ecfg;
  vcfg.guard.reset();  // variational part is unbounded by design
  const Vec s1 = flow_at(augmented, s0, period, vcfg);

  MonodromyResult res;
  res.matrix.resize(n, n);
  for (int j = 0; j < n; ++j) res.matrix.col(j) = s1.segment(n + j * n, n);

  Eigen::EigenSolver<Eigen::MatrixXd> solver(Eigen::MatrixXd(res.matrix), false);
  res.multipliers.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) res.multipliers[static_cast<std::size_t>(i)] = solver.eigenvalues()[i];
  std::sort(res.multipliers.begin(), res.multipliers.end(),
            [](const auto& a, const auto& b) {
              const double ma = std::abs(a), mb = std::abs(b);
              if (ma != mb) return ma > mb;
              return a.imag() > b.imag();
            });
  return res;
}

int LimitCycle::trivial_multiplier_index() const {
  int best = -1;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < multipliers.size(); ++i) {
    const double d = std::abs(multipliers[i] - std::complex<double>(1.0, 0.0));
    if (d < best_dist) {
      best_dist = d;
      best = static_cast<int>(i);
    }
  }
  return best;
}

double LimitCycle::contraction_rate() const {
  const int trivial = trivial_multiplier_index();
  double slowest = 0.0;
  bool found = false;
  for (std::size_t i = 0; i < multipliers.size(); ++i) {
    if (static_cast<int>(i) == trivial) continue;
    const double m = std::abs(multipliers[i]);
    if (m < 1.0 && m > 0.0) {
      const double rate = -std::log(m) / period;
      if (!found || rate < slowest) {
        slowest = rate;
        found = true;
      }
    }
  }
  return found ? slowest : 0.0;
}

double polyline_distance(const std::vector<Vec>& loop, const Vec& x, Vec* nearest) {
  double best = std::numeric_limits<double>::infinity();
  const std::size_t m = loop.size();
  for (std::size_t i = 0; i < m; ++i) {
    const Vec& a = loop[i];
    const Vec& b = loop[(i + 1) % m];
    const Vec ab = b - a;
    const double len2 = ab.squaredNorm();
    double s = len2 > 0.0 ? (x - a).dot(ab) / len2 : 0.0;
    s = std::clamp(s, 0.0, 1.0);
    const Vec p = a + s * ab;
    const double d = (x - p).norm();
    if (d < best) {
      best = d;
      if (nearest) *nearest = p;
    }
  }
  return best;
}

double hausdorff_distance(const std::vector<Vec>& a, const std::vector<Vec>& b) {
  double h = 0.0;
  for (const Vec& p : a) h = std::max(h, polyline_distance(b, p));
  for (const Vec& p : b) h = std::max(h, polyline_distance(a, p));
  return h;
}

double LimitCycle::distance_to_orbit(const Vec& x) const {
  return polyline_distance(points, x);
}

namespace {

// Orthonormal basis of the section hyperplane (columns orthogonal to normal).
Eigen::MatrixXd section_basis(const Vec& normal) {
  const int n = static_cast<int>(normal.size());
  Eigen::MatrixXd nn(n, 1);
  nn.col(0) = normal;
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(nn);
  Eigen::MatrixXd q = qr.householderQ();
  return q.rightCols(n - 1);
}

}  // namespace

LimitCycle find_limit_cycle(const VectorField& field, const PoincareSection& section,
                            const Vec& seed, const IntegratorConfig& cfg,
                            const CycleSearchOptions& opts) {
  const int n = field.dimension();
  if (n < 2) throw std::invalid_argument("find_limit_cycle: needs dimension >= 2");
  if (std::abs(section.normal.dot(field(seed))) <= 1e-14)
    throw std::invalid_argument("find_limit_cycle: flow not transverse to section at seed");

  const Eigen::MatrixXd basis = section_basis(section.normal);
  const int m = n - 1;

  // Project the seed onto the section.
  Eigen::VectorXd y = basis.transpose() * Eigen::VectorXd(seed - section.anchor);

  auto lift = [&](const Eigen::VectorXd& yy) { return Vec(section.anchor + Vec(basis * yy)); };
  double return_time = 0.0;
  auto residual = [&](const Eigen::VectorXd& yy) {
    const Vec x = lift(yy);
    const ReturnResult ret = poincare_return(field, section, x, cfg, opts.t_max_return);
    return_time = ret.time;
    return Eigen::VectorXd(basis.transpose() * Eigen::VectorXd(ret.point - x));
  };

  Eigen::VectorXd r = residual(y);
  double period = return_time;
  int iters = 0;
  while (r.norm() >= opts.residual_tol) {
    if (++iters > opts.max_newton_iters) throw CycleNewtonError(iters, r.norm());

    // Forward-difference Jacobian of the section-restricted displacement map.
    Eigen::MatrixXd jac(m, m);
    for (int j = 0; j < m; ++j) {
      const double h = 1e-7 * (1.0 + std::abs(y[j]));
      Eigen::VectorXd yj = y;
      yj[j] += h;
      jac.col(j) = (residual(yj) - r) / h;
    }

    Eigen::VectorXd step = jac.fullPivLu().solve(-r);
    double damp = 1.0;
    for (int halving = 0; halving <= 5; ++halving) {
      Eigen::VectorXd y_try = y + damp * step;
      Eigen::VectorXd r_try = residual(y_try);
      if (r_try.norm() < r.norm() || halving == 5) {
        y = y_try;
        r = r_try;
        period = return_time;
        break;
      }
      damp *= 0.5;
    }
  }

  LimitCycle cycle;
  cycle.section = section;
  cycle.anchor = lift(y);
  cycle.period = period;

  // Uniform-in-time orbit samples over one period.
  const Trajectory orbit = integrate(field, cycle.anchor, 0.0, period, cfg);
  cycle.closure_error = (orbit.last_state() - cycle.anchor).norm();
  const int k = std::max(opts.orbit_samples, 256);
  cycle.times.resize(static_cast<std::size_t>(k));
  cycle.points.resize(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    const double t = period * static_cast<double>(i) / k;
    cycle.times[static_cast<std::size_t>(i)] = t;
    cycle.points[static_cast<std::size_t>(i)] = orbit.at(t);
  }

  const MonodromyResult mono = monodromy(field, cycle.anchor, period, cfg);
  cycle.monodromy = mono.matrix;
  cycle.multipliers = mono.multipliers;

  const int trivial = cycle.trivial_multiplier_index();
  bool ok = std::abs(cycle.multipliers[static_cast<std::size_t>(trivial)] -
                     std::complex<double>(1.0, 0.0)) < 1e-6;
  for (std::size_t i = 0; i < cycle.multipliers.size(); ++i) {
    if (static_cast<int>(i) == trivial) continue;
    if (std::abs(std::abs(cycle.multipliers[i]) - 1.0) < opts.hyperbolicity_tol) ok = false;
  }
  cycle.hyperbolic = ok;
  return cycle;
}

LimitCycle find_limit_cycle(const VectorField& field, const Vec& seed, const IntegratorConfig& cfg,
                            const CycleSearchOptions& opts) {
  const Vec f = field(seed);
  if (f.norm() <= 1e-14)
    throw std::invalid_argument("find_limit_cycle: seed is an equilibrium");
  return find_limit_cycle(field, PoincareSection(seed, Vec(f / f.norm())), seed, cfg, opts);
}

}  // namespace approx
