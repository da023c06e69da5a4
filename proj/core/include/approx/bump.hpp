#pragma once

#include <memory>
#include <stdexcept>
#include <vector>

#include "approx/cycles.hpp"
#include "approx/vector_field.hpp"

namespace approx {

class BumpSignError : public std::runtime_error {
 public:
  BumpSignError(const Vec& x, double value)
      : std::runtime_error("multiplicative correction factor is non-positive (" +
                           std::to_string(value) + ") at a sample point"),
        point(x),
        value(value) {}
  Vec point;
  double value;
};

/// Scalar tube bump psi around a reference cycle: exactly 1 within distance
/// r_in of the sampled orbit, exactly 0 beyond r_out, C^2 in between.
class BumpFunction {
 public:
  BumpFunction(const LimitCycle& cycle, double r_in, double r_out);

  double r_in() const { return r_in_; }
  double r_out() const { return r_out_; }
  const std::vector<Vec>& orbit() const { return *orbit_; }

  double value(const Vec& x) const;
  /// Gradient via the unit direction away from the nearest orbit point
  /// (zero on both plateaus).
  Vec gradient(const Vec& x) const;

  /// Max of psi over another cycle's samples (leakage xi).
  double leakage_on(const LimitCycle& other) const;

 private:
  std::shared_ptr<const std::vector<Vec>> orbit_;
  double r_in_;
  double r_out_;
};

/// Default tube radii from the minimum inter-cycle separation.
struct TubeRadii {
  double r_in;
  double r_out;
};
inline TubeRadii default_tube_radii(double separation) {
  return {0.2 * separation, 0.4 * separation};
}

enum class BumpVariant {
  Aligned,     // Phi = psi * f        (default)
  Normalized,  // Phi = psi * f/||f||^2
};

/// Vector-valued localized correction direction.
struct VectorBump {
  BumpFunction psi;
  VectorField phi;
  BumpVariant variant = BumpVariant::Aligned;
  double alignment_nu = 0.0;     // on-cycle max deviation from the design target
  double min_speed_on_tube = 0.0;
  bool near_boundary = false;    // cycle within r_out of the domain boundary
};

/// Builds Phi = psi*f (aligned) or psi*f/||f||^2 (normalized) around `cycle`.
/// The normalized variant requires ||f|| bounded away from zero on the tube.
VectorBump make_vector_bump(const VectorField& base, const LimitCycle& cycle, double r_in,
                            double r_out, BumpVariant variant = BumpVariant::Aligned,
                            const Domain* domain = nullptr);

/// Max of ||Phi|| over another cycle's samples (leakage zeta).
double vector_bump_leakage(const VectorBump& bump, const LimitCycle& other);

/// (1 + sum_i alpha_i psi_i) * f. Verifies positivity of the factor on the
/// orbit samples and tube probes; throws BumpSignError with a witness point.
VectorField corrected_field_multiplicative(const VectorField& base,
                                           const std::vector<BumpFunction>& bumps,
                                           const std::vector<double>& alpha);

/// f + sum_j alpha_j Phi_j.
VectorField corrected_field_additive(const VectorField& base,
                                     const std::vector<VectorBump>& bumps,
                                     const std::vector<double>& alpha);

}  // namespace approx
