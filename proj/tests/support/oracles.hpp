#pragma once

// Test-only oracles, independent of the adaptive integration path under test.

#include <cmath>
#include <functional>

#include "approx/types.hpp"
#include "approx/vector_field.hpp"

namespace approx::testing {

/// Classical fixed-step RK4. Independent of the production stepper.
inline Vec rk4_fixed(const VectorField& f, Vec x, double t0, double t1, int steps) {
  const double h = (t1 - t0) / steps;
  for (int i = 0; i < steps; ++i) {
    const Vec k1 = f(x);
    const Vec k2 = f(Vec(x + 0.5 * h * k1));
    const Vec k3 = f(Vec(x + 0.5 * h * k2));
    const Vec k4 = f(Vec(x + h * k3));
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return x;
}

/// Closed form for x' = x - x^3:
///   x(t) = x0 e^t / sqrt(1 + x0^2 (e^{2t} - 1)).
inline double double_well_exact(double x0, double t) {
  if (x0 == 0.0) return 0.0;
  if (2.0 * t > 600.0) return x0 > 0 ? 1.0 : -1.0;
  const double e2t = std::exp(2.0 * t);
  return x0 * std::exp(t) / std::sqrt(1.0 + x0 * x0 * (e2t - 1.0));
}

/// Closed form for r' = kappa r (1 - r^2) (same logistic structure).
inline double radial_exact(double r0, double kappa, double t) {
  if (r0 == 0.0) return 0.0;
  if (2.0 * kappa * t > 600.0) return 1.0;
  const double e2t = std::exp(2.0 * kappa * t);
  return r0 * std::exp(kappa * t) / std::sqrt(1.0 + r0 * r0 * (e2t - 1.0));
}

/// Planar radial-cycle flow for beta = 0 (decoupled polar dynamics).
inline Vec radial_cycle_exact(const Vec& x0, double kappa, double omega, double t) {
  const double r0 = std::hypot(x0[0], x0[1]);
  const double th0 = std::atan2(x0[1], x0[0]);
  const double r = radial_exact(r0, kappa, t);
  const double th = th0 + omega * t;
  return make_vec({r * std::cos(th), r * std::sin(th)});
}

/// Bisection root of a scalar function on a sign-changing bracket.
inline double bisect(const std::function<double(double)>& fn, double lo, double hi,
                     double tol = 1e-12) {
  double flo = fn(lo);
  for (int i = 0; i < 200 && (hi - lo) > tol; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = fn(mid);
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace approx::testing
