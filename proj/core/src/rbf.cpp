#include "approx/rbf.hpp"

#include <cmath>

#include "approx/sampling.hpp"

namespace approx {

RbfApproximant::RbfApproximant(std::vector<Vec> centers, double sigma, Eigen::MatrixXd weights,
                               RbfFitReport report)
    : centers_(std::move(centers)),
      sigma_(sigma),
      weights_(std::move(weights)),
      report_(std::move(report)),
      dim_(centers_.empty() ? 0 : static_cast<int>(centers_.front().size())) {
  if (centers_.empty()) throw std::invalid_argument("RbfApproximant: no centers");
  if (!(sigma_ > 0.0)) throw std::invalid_argument("RbfApproximant: width must be positive");
}

Vec RbfApproximant::eval(const Vec& x) const {
  const double inv2s2 = 1.0 / (2.0 * sigma_ * sigma_);
  Vec out = Vec::Zero(dim_);
  for (std::size_t c = 0; c < centers_.size(); ++c) {
    const double phi = std::exp(-(x - centers_[c]).squaredNorm() * inv2s2);
    for (int d = 0; d < dim_; ++d) out[d] += weights_(static_cast<Eigen::Index>(c), d) * phi;
  }
  return out;
}

Mat RbfApproximant::jacobian(const Vec& x) const {
  const double inv_s2 = 1.0 / (sigma_ * sigma_);
  Mat jac = Mat::Zero(dim_, dim_);
  for (std::size_t c = 0; c < centers_.size(); ++c) {
    const Vec diff = x - centers_[c];
    const double phi = std::exp(-diff.squaredNorm() * inv_s2 / 2.0);
    // d(phi)/dx_j = -phi * diff_j / sigma^2
    for (int d = 0; d < dim_; ++d) {
      const double w = weights_(static_cast<Eigen::Index>(c), d) * phi * inv_s2;
      for (int j = 0; j < dim_; ++j) jac(d, j) -= w * diff[j];
    }
  }
  return jac;
}

VectorField RbfApproximant::field() const {
  RbfApproximant self = *this;
  return VectorField(
      dim_, [self](const Vec& x) { return self.eval(x); },
      [self](const Vec& x) { return self.jacobian(x); }, "rbf-approximant");
}

RbfApproximant fit_rbf(const VectorField& target, const Domain& domain,
                       const RbfFitOptions& opts) {
  if (opts.n_centers < 4) throw std::invalid_argument("fit_rbf: need at least 4 centers");
  const int dim = target.dimension();

  // Centers overshoot the domain by two widths; Gaussian bases have no
  // boundary terms, so the fit degrades badly at the edges otherwise.
  const Domain center_box = domain.inflated(2.0 * opts.sigma);
  std::vector<Vec> centers;
  centers.reserve(static_cast<std::size_t>(opts.n_centers));
  if (dim == 1) {
    for (int c = 0; c < opts.n_centers; ++c) {
      const double t = opts.n_centers == 1 ? 0.5
                                           : static_cast<double>(c) / (opts.n_centers - 1);
      centers.push_back(make_vec({center_box.lo[0] + (center_box.hi[0] - center_box.lo[0]) * t}));
    }
  } else {
    SamplerSpec spec{SamplerKind::LowDiscrepancy, opts.n_centers, opts.seed ^ 0xc3};
    centers = sample_domain(center_box, spec);
  }

  const auto samples = sample_domain(domain, {SamplerKind::LowDiscrepancy, opts.n_samples, opts.seed});
  const Eigen::Index m = static_cast<Eigen::Index>(samples.size());
  const Eigen::Index k = static_cast<Eigen::Index>(centers.size());

  Eigen::MatrixXd design(m, k);
  Eigen::MatrixXd values(m, dim);
  const double inv2s2 = 1.0 / (2.0 * opts.sigma * opts.sigma);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index c = 0; c < k; ++c)
      design(i, c) = std::exp(-(samples[static_cast<std::size_t>(i)] -
                                centers[static_cast<std::size_t>(c)]).squaredNorm() * inv2s2);
    const Vec f = target(samples[static_cast<std::size_t>(i)]);
    for (int d = 0; d < dim; ++d) values(i, d) = f[d];
  }

  // Ridge solve through the SVD (stable for the notoriously ill-conditioned
  // Gaussian design): w = V diag(s/(s^2+ridge)) U^T y.
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(design, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& s = svd.singularValues();
  const double s_max = s(0);
  double gain = 0.0;  // worst data-to-coefficient amplification
  Eigen::VectorXd filter(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    filter(i) = s(i) / (s(i) * s(i) + opts.ridge);
    gain = std::max(gain, filter(i));
  }
  const double condition = s_max * gain;
  if (condition > opts.condition_limit) throw IllConditionedFitError(condition);

  Eigen::MatrixXd weights = svd.matrixV() * filter.asDiagonal() * (svd.matrixU().transpose() * values);

  RbfFitReport report;
  report.condition = condition;
  const Eigen::MatrixXd resid = design * weights - values;
  report.rmse = std::sqrt(resid.squaredNorm() / static_cast<double>(m * dim));
  report.max_residual = resid.cwiseAbs().maxCoeff();

  RbfApproximant draft(centers, opts.sigma, weights, report);
  report.distance_to_target = c1_distance_estimate(draft.field(), target, domain,
                                                   std::max(256, opts.n_samples), opts.seed ^ 0x5d);
  return RbfApproximant(std::move(centers), opts.sigma, std::move(weights), report);
}

}  // namespace approx
