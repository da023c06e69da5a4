#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

#include "approx/cycles.hpp"
#include "approx/fixed_points.hpp"
#include "approx/integrate.hpp"
#include "approx/sampling.hpp"

namespace approx {

class TopologyChangedError : public std::runtime_error {
 public:
  TopologyChangedError(std::size_t n_a, std::size_t n_b)
      : std::runtime_error("attractor topology changed: " + std::to_string(n_a) + " vs " +
                           std::to_string(n_b) +
                           " attractors (perturbation exceeded the structural-stability radius)") {}
  explicit TopologyChangedError(const std::string& why)
      : std::runtime_error("attractor topology changed: " + why) {}
};

/// A registered stable invariant set (point or cycle) with its capture ball.
struct Attractor {
  enum class Kind { Point, Cycle };
  Kind kind = Kind::Point;
  int id = -1;
  FixedPoint fp;                           // Kind::Point
  std::shared_ptr<const LimitCycle> cycle; // Kind::Cycle
  double capture_radius = 0.0;
  double rate = 1.0;  // slowest contraction rate lambda

  double distance(const Vec& x) const {
    return kind == Kind::Point ? (x - fp.location).norm() : cycle->distance_to_orbit(x);
  }
  Vec representative() const { return kind == Kind::Point ? fp.location : cycle->anchor; }
  double relaxation_time() const { return 3.0 / rate; }
};

/// Stable attractors with pairwise-disjoint capture balls. Capture radius
/// defaults to 0.1x the minimum attractor separation.
class AttractorRegistry {
 public:
  void add(const FixedPoint& fp);
  void add(LimitCycle cycle);

  /// Assigns capture radii and validates stability/disjointness.
  void finalize(const Domain& domain, double radius_factor = 0.1);

  const std::vector<Attractor>& attractors() const { return list_; }
  std::size_t size() const { return list_.size(); }
  const Attractor& operator[](std::size_t i) const { return list_[i]; }
  double min_separation() const { return min_separation_; }
  bool finalized() const { return finalized_; }

 private:
  std::vector<Attractor> list_;
  double min_separation_ = 0.0;
  bool finalized_ = false;
};

/// `id` is the capturing attractor, or -1 (Unresolved).
struct LabelResult {
  int id = -1;
  bool escaped = false;
  double t_capture = 0.0;  // entry time into the capture ball
  double t_end = 0.0;      // integration time spent
};

inline bool resolved(const LabelResult& r) { return r.id >= 0; }

/// Integrates until the state stays inside some capture ball for one
/// relaxation time, or t_max elapses (Unresolved), or the domain is escaped.
LabelResult label_basin(const VectorField& field, const AttractorRegistry& registry,
                        const Vec& x0, const IntegratorConfig& cfg, double t_max,
                        const Domain& domain);

/// Same labeling logic driven on an existing stepper (the trajectory keeps
/// accumulating and can be extended afterwards).
LabelResult label_with_stepper(OdeStepper& stepper, const AttractorRegistry& registry,
                               double t_max);

/// Batched labeling with capture statistics.
struct BasinLabeling {
  SamplerSpec sampler;
  std::vector<LabelResult> labels;
  int n_unresolved = 0;
  int n_escaped = 0;
};
BasinLabeling label_basin_bulk(const VectorField& field, const AttractorRegistry& registry,
                               const Domain& domain, const SamplerSpec& sampler,
                               const IntegratorConfig& cfg, double t_max, int jobs = 0);

/// One-to-one pairing a->b by nearest representative; rejects any pairing
/// farther than half the minimum separation and mismatched counts.
std::vector<int> match_registries(const AttractorRegistry& a, const AttractorRegistry& b);

struct MismatchReport {
  double nu = 0.0;  // perturbation amplitude tag (set by sweep drivers)
  double delta_hat = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  int n = 0;
  std::uint64_t seed = 0;
  int n_mismatch = 0;
  int n_unresolved = 0;
  std::vector<int> mismatched_indices;  // ascending sample indices
  std::vector<Vec> mismatched_points;
};

/// Monte Carlo fraction of initial conditions labeled to non-matching
/// attractors. Unresolved samples count as mismatches (conservative).
MismatchReport basin_mismatch_volume(const VectorField& field_a, const VectorField& field_b,
                                     const AttractorRegistry& reg_a,
                                     const AttractorRegistry& reg_b,
                                     const std::vector<int>& matching, const Domain& domain,
                                     int n, std::uint64_t seed, const IntegratorConfig& cfg,
                                     double t_max, int jobs = 0);

/// Bisection on basin labels of a 1D field; bracket endpoints must resolve to
/// different attractors.
double locate_separatrix_1d(const VectorField& field, const AttractorRegistry& registry,
                            double lo, double hi, double tol, const IntegratorConfig& cfg,
                            double t_max, const Domain& domain);

struct ScalingRow {
  double nu = 0.0;
  double delta_hat = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  bool topology_changed = false;
};

struct ScalingFit {
  std::vector<ScalingRow> rows;
  double slope = 0.0;  // fitted C_S (OLS through the origin over valid rows)
  double r2 = 0.0;
};

/// delta(nu) sweep with a linear fit through the origin. Rows whose
/// perturbation changes the attractor count are flagged and excluded.
ScalingFit basin_scaling_experiment(const VectorField& base, const VectorField& g,
                                    const std::vector<double>& nu_list, const Domain& domain,
                                    int n, std::uint64_t seed, const IntegratorConfig& cfg,
                                    double t_max, int jobs = 0);

}  // namespace approx
