#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <utility>

#include "approx/types.hpp"

namespace approx {

/// Evaluable C^1 vector field with an (optionally analytic) Jacobian.
/// Immutable after construction; evaluation is deterministic and
/// side-effect free, so instances are safely shared across workers.
class VectorField {
 public:
  using EvalFn = std::function<Vec(const Vec&)>;
  using JacFn = std::function<Mat(const Vec&)>;

  VectorField() = default;
  VectorField(int dim, EvalFn eval, JacFn jac = nullptr, std::string name = {})
      : dim_(dim), eval_(std::move(eval)), jac_(std::move(jac)), name_(std::move(name)) {
    if (dim_ <= 0) throw std::invalid_argument("VectorField: dimension must be positive");
    if (!eval_) throw std::invalid_argument("VectorField: eval required");
  }

  int dimension() const { return dim_; }
  const std::string& name() const { return name_; }
  bool has_analytic_jacobian() const { return static_cast<bool>(jac_); }

  Vec operator()(const Vec& x) const { return eval_(x); }

  /// Analytic Jacobian when provided, central finite differences otherwise.
  Mat jacobian(const Vec& x) const {
    if (jac_) return jac_(x);
    return fd_jacobian(x);
  }

  Mat fd_jacobian(const Vec& x) const;

 private:
  int dim_ = 0;
  EvalFn eval_;
  JacFn jac_;
  std::string name_;
};

/// Axis-aligned box domain. `margin` is the inward-pointing velocity margin
/// gamma used by boundary checks (0 = unspecified).
struct Domain {
  Vec lo;
  Vec hi;
  double margin = 0.0;

  Domain() = default;
  Domain(Vec lo_, Vec hi_, double margin_ = 0.0)
      : lo(std::move(lo_)), hi(std::move(hi_)), margin(margin_) {
    if (lo.size() != hi.size()) throw std::invalid_argument("Domain: corner size mismatch");
    for (Eigen::Index i = 0; i < lo.size(); ++i)
      if (!(lo[i] < hi[i])) throw std::invalid_argument("Domain: degenerate box");
  }

  int dimension() const { return static_cast<int>(lo.size()); }

  /// Euclidean distance between extreme corners.
  double diameter() const { return (hi - lo).norm(); }

  /// Largest side length; the natural length scale for Newton step caps.
  double extent() const { return (hi - lo).maxCoeff(); }

  bool contains(const Vec& x) const {
    for (Eigen::Index i = 0; i < lo.size(); ++i)
      if (x[i] < lo[i] || x[i] > hi[i]) return false;
    return true;
  }

  /// Box inflated by `pad` on every side (divergence guards).
  Domain inflated(double pad) const {
    Domain d = *this;
    d.lo.array() -= pad;
    d.hi.array() += pad;
    return d;
  }
};

}  // namespace approx
