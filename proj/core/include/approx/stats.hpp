#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace approx {

struct WilsonInterval {
  double lo = 0.0;
  double hi = 1.0;
};

/// 95% Wilson score interval for k successes out of n; valid at small counts.
inline WilsonInterval wilson_95(int k, int n) {
  if (n <= 0) throw std::invalid_argument("wilson_95: n must be positive");
  const double z = 1.959963984540054;
  const double p = static_cast<double>(k) / n;
  const double z2n = z * z / n;
  const double center = (p + z2n / 2.0) / (1.0 + z2n);
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2n / (4.0 * n)) / (1.0 + z2n);
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

struct OriginFit {
  double slope = 0.0;
  double r2 = 0.0;  // 1 - SS_res / SS_tot (SS_tot about the mean)
};

/// Ordinary least squares through the origin, y ~ slope * x.
inline OriginFit ols_through_origin(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.empty())
    throw std::invalid_argument("ols_through_origin: bad input sizes");
  double sxy = 0.0, sxx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += xs[i] * ys[i];
    sxx += xs[i] * xs[i];
    sy += ys[i];
  }
  OriginFit fit;
  fit.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  const double ymean = sy / static_cast<double>(ys.size());
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - fit.slope * xs[i];
    ss_res += r * r;
    ss_tot += (ys[i] - ymean) * (ys[i] - ymean);
  }
  fit.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  return fit;
}

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

inline LineFit least_squares_line(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.size() < 2)
    throw std::invalid_argument("least_squares_line: need >= 2 points");
  const double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  LineFit fit;
  const double denom = n * sxx - sx * sx;
  fit.slope = denom != 0.0 ? (n * sxy - sx * sy) / denom : 0.0;
  fit.intercept = (sy - fit.slope * sx) / n;
  double ss_res = 0, ss_tot = 0;
  const double ymean = sy / n;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
    ss_res += r * r;
    ss_tot += (ys[i] - ymean) * (ys[i] - ymean);
  }
  fit.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  return fit;
}

/// q-quantile (0 <= q <= 1) by sorted-order index; copies the input.
inline double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("percentile: empty input");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const std::size_t i = static_cast<std::size_t>(pos);
  if (i + 1 >= values.size()) return values.back();
  const double w = pos - static_cast<double>(i);
  return values[i] * (1.0 - w) + values[i + 1] * w;
}

}  // namespace approx
