#include "approx/bump.hpp"

#include <cmath>
#include <limits>

#include "approx/smoothstep.hpp"

namespace approx {

BumpFunction::BumpFunction(const LimitCycle& cycle, double r_in, double r_out)
    : orbit_(std::make_shared<const std::vector<Vec>>(cycle.points)),
      r_in_(r_in),
      r_out_(r_out) {
  if (!(r_in > 0.0 && r_out > r_in))
    throw std::invalid_argument("BumpFunction: need 0 < r_in < r_out");
  if (cycle.points.size() < 8) throw std::invalid_argument("BumpFunction: orbit too sparse");
}

double BumpFunction::value(const Vec& x) const {
  return plateau(polyline_distance(*orbit_, x), r_in_, r_out_);
}

Vec BumpFunction::gradient(const Vec& x) const {
  Vec nearest;
  const double d = polyline_distance(*orbit_, x, &nearest);
  if (d <= r_in_ || d >= r_out_ || d < 1e-14) return Vec::Zero(x.size());
  const double dpsi = plateau_deriv(d, r_in_, r_out_);
  return Vec((dpsi / d) * (x - nearest));
}

double BumpFunction::leakage_on(const LimitCycle& other) const {
  double xi = 0.0;
  for (const Vec& p : other.points) xi = std::max(xi, value(p));
  return xi;
}

VectorBump make_vector_bump(const VectorField& base, const LimitCycle& cycle, double r_in,
                            double r_out, BumpVariant variant, const Domain* domain) {
  BumpFunction psi(cycle, r_in, r_out);

  // Speed floor over the tube: orbit samples plus radial probes. The
  // normalized variant is undefined where the field vanishes.
  double min_speed = std::numeric_limits<double>::infinity();
  for (const Vec& p : cycle.points) min_speed = std::min(min_speed, base(p).norm());
  if (variant == BumpVariant::Normalized && min_speed < 1e-8)
    throw std::invalid_argument("make_vector_bump: field vanishes on the tube; "
                                "normalized variant unavailable");

  bool near_boundary = false;
  if (domain) {
    for (const Vec& p : cycle.points) {
      for (int d = 0; d < domain->dimension(); ++d) {
        if (p[d] - domain->lo[d] < r_out || domain->hi[d] - p[d] < r_out) near_boundary = true;
      }
    }
  }

  VectorField phi;
  if (variant == BumpVariant::Aligned) {
    phi = VectorField(
        base.dimension(),
        [base, psi](const Vec& x) {
          const double w = psi.value(x);
          return w == 0.0 ? Vec(Vec::Zero(x.size())) : Vec(w * base(x));
        },
        [base, psi](const Vec& x) {
          const double w = psi.value(x);
          Mat j = Mat::Zero(x.size(), x.size());
          if (w != 0.0) j = w * base.jacobian(x);
          const Vec g = psi.gradient(x);
          if (g.squaredNorm() > 0.0) j += base(x) * g.transpose();
          return j;
        },
        "bump-aligned");
  } else {
    phi = VectorField(
        base.dimension(),
        [base, psi](const Vec& x) {
          const double w = psi.value(x);
          if (w == 0.0) return Vec(Vec::Zero(x.size()));
          const Vec f = base(x);
          return Vec((w / f.squaredNorm()) * f);
        },
        [base, psi](const Vec& x) {
          const Vec f = base(x);
          const double n2 = f.squaredNorm();
          const double w = psi.value(x);
          Mat j = Mat::Zero(x.size(), x.size());
          if (w != 0.0) {
            const Mat df = base.jacobian(x);
            j = (w / n2) * df;
            j -= (2.0 * w / (n2 * n2)) * (f * (f.transpose() * df));
          }
          const Vec g = psi.gradient(x);
          if (g.squaredNorm() > 0.0) j += (1.0 / n2) * (f * g.transpose());
          return j;
        },
        "bump-normalized");
  }

  VectorBump bump{std::move(psi), std::move(phi), variant, 0.0, min_speed, near_boundary};

  // Alignment error against the variant's own design target on the cycle.
  double nu = 0.0;
  for (const Vec& p : cycle.points) {
    const Vec f = base(p);
    const Vec target = variant == BumpVariant::Aligned ? f : Vec(f / f.squaredNorm());
    nu = std::max(nu, (bump.phi(p) - target).norm());
  }
  bump.alignment_nu = nu;
  return bump;
}

double vector_bump_leakage(const VectorBump& bump, const LimitCycle& other) {
  double zeta = 0.0;
  for (const Vec& p : other.points) zeta = std::max(zeta, bump.phi(p).norm());
  return zeta;
}

VectorField corrected_field_multiplicative(const VectorField& base,
                                           const std::vector<BumpFunction>& bumps,
                                           const std::vector<double>& alpha) {
  if (bumps.size() != alpha.size())
    throw std::invalid_argument("corrected_field_multiplicative: size mismatch");

  auto factor = [bumps, alpha](const Vec& x) {
    double m = 1.0;
    for (std::size_t i = 0; i < bumps.size(); ++i) m += alpha[i] * bumps[i].value(x);
    return m;
  };

  // Positivity of the factor, witnessed on orbit samples and tube probes.
  for (std::size_t i = 0; i < bumps.size(); ++i) {
    for (std::size_t s = 0; s < bumps[i].orbit().size(); s += 7) {
      const Vec& p = bumps[i].orbit()[s];
      const double m = factor(p);
      if (!(m > 0.0)) throw BumpSignError(p, m);
      // Radial probe halfway into the falloff region.
      Vec q = p;
      q[0] += 0.5 * (bumps[i].r_in() + bumps[i].r_out());
      const double mq = factor(q);
      if (!(mq > 0.0)) throw BumpSignError(q, mq);
    }
  }

  return VectorField(
      base.dimension(),
      [base, factor](const Vec& x) { return Vec(factor(x) * base(x)); },
      [base, factor, bumps, alpha](const Vec& x) {
        Mat j = factor(x) * base.jacobian(x);
        Vec grad = Vec::Zero(x.size());
        for (std::size_t i = 0; i < bumps.size(); ++i) grad += alpha[i] * bumps[i].gradient(x);
        if (grad.squaredNorm() > 0.0) j += base(x) * grad.transpose();
        return j;
      },
      base.name() + "*corrected");
}

VectorField corrected_field_additive(const VectorField& base,
                                     const std::vector<VectorBump>& bumps,
                                     const std::vector<double>& alpha) {
  if (bumps.size() != alpha.size())
    throw std::invalid_argument("corrected_field_additive: size mismatch");
  std::vector<VectorField> phis;
  phis.reserve(bumps.size());
  for (const auto& b : bumps) phis.push_back(b.phi);
  return VectorField(
      base.dimension(),
      [base, phis, alpha](const Vec& x) {
        Vec f = base(x);
        for (std::size_t i = 0; i < phis.size(); ++i) f += alpha[i] * phis[i](x);
        return f;
      },
      [base, phis, alpha](const Vec& x) {
        Mat j = base.jacobian(x);
        for (std::size_t i = 0; i < phis.size(); ++i) j += alpha[i] * phis[i].jacobian(x);
        return j;
      },
      base.name() + "+corrected");
}

}  // namespace approx
