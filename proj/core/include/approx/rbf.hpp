#pragma once

#include <stdexcept>
#include <vector>

#include "approx/distance.hpp"
#include "approx/vector_field.hpp"

namespace approx {

class IllConditionedFitError : public std::runtime_error {
 public:
  explicit IllConditionedFitError(double cond)
      : std::runtime_error("RBF normal equations ill-conditioned (estimate " +
                           std::to_string(cond) + "); increase ridge or reduce centers"),
        condition(cond) {}
  double condition;
};

struct RbfFitReport {
  double rmse = 0.0;           // fit residual over the training samples
  double max_residual = 0.0;
  double condition = 0.0;      // effective condition of the regularized solve
  C1Distance distance_to_target;  // measured after the fit
};

/// Gaussian radial-basis vector field fitted by ridge-regularized least
/// squares. Smooth, with an analytic Jacobian.
class RbfApproximant {
 public:
  RbfApproximant(std::vector<Vec> centers, double sigma, Eigen::MatrixXd weights,
                 RbfFitReport report);

  int dimension() const { return dim_; }
  const std::vector<Vec>& centers() const { return centers_; }
  double width() const { return sigma_; }
  const RbfFitReport& report() const { return report_; }

  Vec eval(const Vec& x) const;
  Mat jacobian(const Vec& x) const;
  VectorField field() const;

 private:
  std::vector<Vec> centers_;
  double sigma_;
  Eigen::MatrixXd weights_;  // n_centers x dim
  RbfFitReport report_;
  int dim_;
};

struct RbfFitOptions {
  int n_centers = 25;
  double sigma = 0.4;
  double ridge = 1e-10;
  int n_samples = 400;
  std::uint64_t seed = 0;
  double condition_limit = 1e14;
};

/// Fits the approximant to sampled values of `target` over `domain` and
/// attaches the measured C^0/C^1 distances to the report.
RbfApproximant fit_rbf(const VectorField& target, const Domain& domain,
                       const RbfFitOptions& opts);

}  // namespace approx
