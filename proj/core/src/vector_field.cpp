#include "approx/vector_field.hpp"

#include <cmath>
#include <limits>

namespace approx {

Mat VectorField::fd_jacobian(const Vec& x) const {
  const double sqrt_eps = std::sqrt(std::numeric_limits<double>::epsilon());
  Mat jac(dim_, dim_);
  Vec xp = x, xm = x;
  for (int j = 0; j < dim_; ++j) {
    const double h = sqrt_eps * (1.0 + std::abs(x[j]));
    xp[j] = x[j] + h;
    xm[j] = x[j] - h;
    jac.col(j) = (eval_(xp) - eval_(xm)) / (xp[j] - xm[j]);
    xp[j] = x[j];
    xm[j] = x[j];
  }
  return jac;
}

}  // namespace approx
