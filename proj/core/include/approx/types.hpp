#pragma once

#include <Eigen/Dense>

namespace approx {

// State dimensions stay small (n <= 3 systems, plus augmented variational
// states up to n + n^2). Fixed-capacity Eigen storage keeps hot loops off
// the heap.
inline constexpr int kMaxDim = 16;

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

inline Vec make_vec(std::initializer_list<double> xs) {
  Vec v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

/// Spectral (operator 2-) norm; largest singular value.
inline double operator_norm(const Mat& m) {
  if (m.rows() == 1 && m.cols() == 1) return std::abs(m(0, 0));
  return m.jacobiSvd().singularValues()(0);
}

}  // namespace approx
