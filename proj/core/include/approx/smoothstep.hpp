#pragma once

#include <algorithm>

namespace approx {

// C^2 quintic smoothstep with exact plateaus: s(u)=0 for u<=0, 1 for u>=1.
inline double smoothstep(double u) {
  if (u <= 0.0) return 0.0;
  if (u >= 1.0) return 1.0;
  return u * u * u * (u * (6.0 * u - 15.0) + 10.0);
}

inline double smoothstep_deriv(double u) {
  if (u <= 0.0 || u >= 1.0) return 0.0;
  const double w = u * (1.0 - u);
  return 30.0 * w * w;
}

/// Plateau profile of a distance d: exactly 1 for d <= r_in, exactly 0 for
/// d >= r_out, C^2 monotone in between.
inline double plateau(double d, double r_in, double r_out) {
  return 1.0 - smoothstep((d - r_in) / (r_out - r_in));
}

inline double plateau_deriv(double d, double r_in, double r_out) {
  return -smoothstep_deriv((d - r_in) / (r_out - r_in)) / (r_out - r_in);
}

}  // namespace approx
