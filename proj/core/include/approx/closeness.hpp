#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "approx/basin.hpp"
#include "approx/distance.hpp"

namespace approx {

/// How the infinite-horizon sup over t >= 0 is witnessed numerically.
/// Converge mode: integrate until both trajectories are captured by
/// registered attractors, then until the running sup is stable for
/// `stable_checkpoints` consecutive checkpoints, then extend by one
/// relaxation time as guard. Everything is capped by t_max.
struct HorizonPolicy {
  enum class Mode { Fixed, Converge };
  Mode mode = Mode::Converge;
  double fixed_horizon = 50.0;
  double t_max = 400.0;
  int stable_checkpoints = 5;
  double stable_rel_tol = 1e-3;
  const AttractorRegistry* registry_a = nullptr;  // required in Converge mode
  const AttractorRegistry* registry_b = nullptr;

  static HorizonPolicy fixed(double horizon) {
    HorizonPolicy p;
    p.mode = Mode::Fixed;
    p.fixed_horizon = horizon;
    p.t_max = horizon;
    return p;
  }
  static HorizonPolicy converge(const AttractorRegistry& a, const AttractorRegistry& b,
                                double t_max = 400.0) {
    HorizonPolicy p;
    p.registry_a = &a;
    p.registry_b = &b;
    p.t_max = t_max;
    return p;
  }
  std::string describe() const;
};

/// Everything measured for one initial condition in one shared pass:
/// labels, stabilized horizon, sup distance, and time-averaged p-power
/// errors at the horizon and at twice the horizon.
struct SampleComparison {
  int label_a = -1;
  int label_b = -1;
  bool escaped = false;        // either trajectory left the domain
  double horizon = 0.0;        // stabilized comparison horizon T_s
  bool capped = false;         // t_max hit before stabilization
  double sup = 0.0;            // capped at the domain diameter on escape
  std::vector<double> lp;      // one entry per requested p
  std::vector<double> lp_2x;   // same averages over [0, 2*T_s]
};

/// Shared-trajectory comparison of two flows from one initial condition.
SampleComparison compare_flows(const VectorField& field_a, const VectorField& field_b,
                               const Vec& x0, const Domain& domain, const HorizonPolicy& policy,
                               const IntegratorConfig& cfg, const std::vector<double>& ps);

/// One pass over a deterministic sample set; the raw material for every
/// estimator below (they all reuse the same trajectories per sample).
struct ComparisonRun {
  std::vector<Vec> samples;
  std::vector<SampleComparison> results;
  std::vector<double> ps;
  std::uint64_t seed = 0;
  std::string horizon_record;
};
ComparisonRun run_comparison(const VectorField& field_a, const VectorField& field_b,
                             const Domain& domain, int n, std::uint64_t seed,
                             const HorizonPolicy& policy, const IntegratorConfig& cfg,
                             const std::vector<double>& ps = {2.0}, int jobs = 0);

struct ClosenessReport {
  double eps = 0.0;
  double estimate = 0.0;  // exceedance count / n, exactly
  double ci_low = 0.0;
  double ci_high = 0.0;
  int n = 0;
  int n_exceed = 0;
  std::uint64_t seed = 0;
  std::string horizon_record;
  std::vector<double> sup_distances;  // per sample
};

/// Fraction of initial conditions whose sup trajectory deviation exceeds eps.
ClosenessReport eps_volume_error(const VectorField& field_a, const VectorField& field_b,
                                 double eps, const Domain& domain, int n, std::uint64_t seed,
                                 const HorizonPolicy& policy, const IntegratorConfig& cfg,
                                 int jobs = 0);
/// Same estimate reusing an existing comparison pass.
ClosenessReport eps_volume_from_run(const ComparisonRun& run, double eps);

/// Conservative test: the 95% CI upper bound must sit below delta.
bool is_eps_delta_close(const ClosenessReport& report, double delta);

/// Smallest grid eps whose exceedance fraction is below eps, with local grid
/// refinement (the estimate never increases under refinement).
double ky_fan_distance(const std::vector<double>& sup_distances, std::vector<double> eps_grid,
                       int refine_rounds = 6);

struct LpReport {
  double p = 2.0;
  std::vector<double> per_sample;      // time-averaged p-power error at T_s
  std::vector<double> per_sample_2x;   // at 2*T_s
  std::vector<double> horizons;
  double average = 0.0;                // arithmetic mean over samples
  double average_2x = 0.0;
  bool horizon_suspect = false;        // averages differ by > 5%
  int n = 0;
  std::uint64_t seed = 0;
};

LpReport lp_error(const VectorField& field_a, const VectorField& field_b, double p,
                  const Domain& domain, int n, std::uint64_t seed, const HorizonPolicy& policy,
                  const IntegratorConfig& cfg, int jobs = 0);
LpReport lp_from_run(const ComparisonRun& run, double p);

struct LpBoundCheck {
  bool holds = false;
  double bound = 0.0;
  double margin = 0.0;  // bound - measured average
};

/// Checks average <= eps^p + delta*D^p. The (eps, delta) pair must be
/// certified by is_eps_delta_close on the same sample set (same n and seed).
LpBoundCheck check_lp_bound(const LpReport& lp, const ClosenessReport& certificate, double eps,
                            double delta, double diameter);

enum class TaxonomyLabel { WithinEps, BType, PType, Other };
const char* to_string(TaxonomyLabel label);

struct TaxonomyResult {
  TaxonomyLabel label = TaxonomyLabel::Other;
  int attractor_a = -1;
  int attractor_b = -1;
  double drift_slope = 0.0;  // PType: phase drift per revolution
  double drift_r2 = 0.0;
};

/// Per-sample error classification. BType when the (matched) basin labels
/// disagree; PType when both converge to matched cycles and the windowed
/// phase difference grows affinely (R^2 > 0.9 over >= 10 revolutions).
std::vector<TaxonomyResult> classify_errors(const VectorField& field_a,
                                            const VectorField& field_b, double eps,
                                            const ComparisonRun& run,
                                            const AttractorRegistry& reg_a,
                                            const AttractorRegistry& reg_b,
                                            const std::vector<int>& matching,
                                            const IntegratorConfig& cfg);

struct PhaseDriftResult {
  double slope_per_rev = 0.0;  // radians of phase difference per revolution
  double r2 = 0.0;
  int revolutions = 0;
};

/// Oriented section-crossing times along the flow from x0 (at most `count`).
std::vector<double> section_crossing_times(const VectorField& field,
                                           const PoincareSection& section, const Vec& x0,
                                           int count, const IntegratorConfig& cfg, double t_max);

/// Phase extracted per revolution from oriented section-crossing times;
/// least-squares slope of the phase difference against revolution index.
PhaseDriftResult phase_drift(const VectorField& field_a, const LimitCycle& cycle_a,
                             const Vec& x0_a, const VectorField& field_b,
                             const LimitCycle& cycle_b, const Vec& x0_b, int n_periods,
                             const IntegratorConfig& cfg, int skip_revs = 5);

/// Spec-shaped wrapper: one initial condition used for both flows.
PhaseDriftResult phase_drift(const VectorField& field_a, const VectorField& field_b,
                             const LimitCycle& cycle_a, const LimitCycle& cycle_b, const Vec& x0,
                             int n_periods, const IntegratorConfig& cfg);

}  // namespace approx
