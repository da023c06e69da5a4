#include "approx/closeness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "approx/parallel.hpp"
#include "approx/stats.hpp"

namespace approx {

std::string HorizonPolicy::describe() const {
  std::ostringstream os;
  if (mode == Mode::Fixed) {
    os << "fixed(T=" << fixed_horizon << ")";
  } else {
    os << "converge(checkpoints=" << stable_checkpoints << ",rel_tol=" << stable_rel_tol
       << ",t_max=" << t_max << ",guard=relaxation)";
  }
  return os.str();
}

namespace {

struct GridMetrics {
  double sup = 0.0;
  std::vector<double> lp;  // per requested p, trapezoid mean of dist^p
};

// Sup and time-averaged p-powers on one shared uniform grid over [t0, t1].
// All quantities come from the same distance samples, so mean(d^p) <= sup^p
// holds sample-exactly.
GridMetrics grid_metrics(const Trajectory& ta, const Trajectory& tb, double t0, double t1, int m,
                         const std::vector<double>& ps) {
  GridMetrics g;
  g.lp.assign(ps.size(), 0.0);
  if (t1 <= t0) return g;
  std::vector<double> powsum(ps.size(), 0.0);
  for (int k = 0; k <= m; ++k) {
    const double t = t0 + (t1 - t0) * (static_cast<double>(k) / m);
    const double d = (ta.at(t) - tb.at(t)).norm();
    g.sup = std::max(g.sup, d);
    const double w = (k == 0 || k == m) ? 0.5 : 1.0;
    for (std::size_t j = 0; j < ps.size(); ++j) powsum[j] += w * std::pow(d, ps[j]);
  }
  for (std::size_t j = 0; j < ps.size(); ++j) g.lp[j] = powsum[j] / m;
  return g;
}

}  // namespace

SampleComparison compare_flows(const VectorField& field_a, const VectorField& field_b,
                               const Vec& x0, const Domain& domain, const HorizonPolicy& policy,
                               const IntegratorConfig& cfg, const std::vector<double>& ps) {
  SampleComparison out;
  out.lp.assign(ps.size(), 0.0);
  out.lp_2x.assign(ps.size(), 0.0);
  const double diameter = domain.diameter();

  IntegratorConfig guarded = cfg;
  if (!guarded.guard) guarded.guard = domain.inflated(1e-9 * domain.extent());
  guarded.max_time = std::max(guarded.max_time, 4.0 * policy.t_max);

  OdeStepper step_a(field_a, x0, 0.0, guarded);
  OdeStepper step_b(field_b, x0, 0.0, guarded);

  auto escape_result = [&]() {
    out.escaped = true;
    out.sup = diameter;
    out.horizon = std::min(step_a.t(), step_b.t());
    for (std::size_t j = 0; j < ps.size(); ++j) {
      out.lp[j] = std::pow(diameter, ps[j]);
      out.lp_2x[j] = out.lp[j];
    }
    return out;
  };

  double relax = 1.0;
  double t_start = 0.0;
  if (policy.mode == HorizonPolicy::Mode::Converge) {
    if (!policy.registry_a || !policy.registry_b)
      throw std::invalid_argument("HorizonPolicy: converge mode requires registries");
    const LabelResult la = label_with_stepper(step_a, *policy.registry_a, policy.t_max);
    const LabelResult lb = label_with_stepper(step_b, *policy.registry_b, policy.t_max);
    out.label_a = la.id;
    out.label_b = lb.id;
    if (la.escaped || lb.escaped) return escape_result();
    if (resolved(la)) relax = std::max(relax, (*policy.registry_a)[la.id].relaxation_time());
    if (resolved(lb)) relax = std::max(relax, (*policy.registry_b)[lb.id].relaxation_time());
    t_start = std::max(step_a.t(), step_b.t());
  } else {
    if (policy.registry_a && policy.registry_b) {
      const LabelResult la = label_with_stepper(step_a, *policy.registry_a, policy.t_max);
      const LabelResult lb = label_with_stepper(step_b, *policy.registry_b, policy.t_max);
      out.label_a = la.id;
      out.label_b = lb.id;
      if (la.escaped || lb.escaped) return escape_result();
    }
    t_start = policy.fixed_horizon;
  }

  double horizon = std::min(std::max(t_start, relax), policy.t_max);
  if (policy.mode == HorizonPolicy::Mode::Converge) {
    // Running-sup stabilization: extend in relaxation-time checkpoints until
    // the sup stops moving for the required number of checks.
    double sup_prev = -1.0;
    int stable = 0;
    while (true) {
      if (step_a.advance_to(horizon) == StopReason::EscapedDomain) return escape_result();
      if (step_b.advance_to(horizon) == StopReason::EscapedDomain) return escape_result();
      const GridMetrics g = grid_metrics(step_a.trajectory(), step_b.trajectory(), 0.0, horizon,
                                         256, {});
      if (sup_prev >= 0.0 &&
          std::abs(g.sup - sup_prev) <= policy.stable_rel_tol * std::max(g.sup, 1e-12))
        ++stable;
      else
        stable = 0;
      sup_prev = g.sup;
      if (stable >= policy.stable_checkpoints) break;
      if (horizon >= policy.t_max) {
        out.capped = true;
        break;
      }
      horizon = std::min(horizon + relax, policy.t_max);
    }
    if (!out.capped) horizon = std::min(horizon + relax, policy.t_max);  // guard extension
  }
  out.horizon = horizon;

  // Final shared grid over [0, T_s], refined until the sup moves < 1%;
  // the same distance samples feed sup and the p-power averages.
  if (step_a.advance_to(2.0 * horizon) == StopReason::EscapedDomain) return escape_result();
  if (step_b.advance_to(2.0 * horizon) == StopReason::EscapedDomain) return escape_result();

  int m = 256;
  GridMetrics g = grid_metrics(step_a.trajectory(), step_b.trajectory(), 0.0, horizon, m, ps);
  for (int round = 0; round < 6; ++round) {
    const GridMetrics g2 =
        grid_metrics(step_a.trajectory(), step_b.trajectory(), 0.0, horizon, 2 * m, ps);
    const bool stable = std::abs(g2.sup - g.sup) <= 0.01 * std::max(g.sup, 1e-14);
    g = g2;
    m *= 2;
    if (stable) break;
  }
  out.sup = g.sup;
  out.lp = g.lp;
  out.lp_2x = grid_metrics(step_a.trajectory(), step_b.trajectory(), 0.0,
                           std::min(2.0 * horizon, std::min(step_a.t(), step_b.t())), m, ps)
                  .lp;
  return out;
}

ComparisonRun run_comparison(const VectorField& field_a, const VectorField& field_b,
                             const Domain& domain, int n, std::uint64_t seed,
                             const HorizonPolicy& policy, const IntegratorConfig& cfg,
                             const std::vector<double>& ps, int jobs) {
  ComparisonRun run;
  run.seed = seed;
  run.ps = ps;
  run.horizon_record = policy.describe();
  run.samples = sample_domain(domain, {SamplerKind::LowDiscrepancy, n, seed});
  run.results.resize(run.samples.size());
  parallel_for(n, jobs, [&](int i) {
    run.results[static_cast<std::size_t>(i)] =
        compare_flows(field_a, field_b, run.samples[static_cast<std::size_t>(i)], domain, policy,
                      cfg, ps);
  });
  return run;
}

ClosenessReport eps_volume_from_run(const ComparisonRun& run, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("eps_volume_error: eps must be positive");
  ClosenessReport rep;
  rep.eps = eps;
  rep.n = static_cast<int>(run.results.size());
  rep.seed = run.seed;
  rep.horizon_record = run.horizon_record;
  rep.sup_distances.reserve(run.results.size());
  for (const auto& r : run.results) {
    rep.sup_distances.push_back(r.sup);
    if (r.sup > eps) ++rep.n_exceed;
  }
  rep.estimate = static_cast<double>(rep.n_exceed) / rep.n;
  const WilsonInterval ci = wilson_95(rep.n_exceed, rep.n);
  rep.ci_low = ci.lo;
  rep.ci_high = ci.hi;
  return rep;
}

ClosenessReport eps_volume_error(const VectorField& field_a, const VectorField& field_b,
                                 double eps, const Domain& domain, int n, std::uint64_t seed,
                                 const HorizonPolicy& policy, const IntegratorConfig& cfg,
                                 int jobs) {
  if (n < 100) throw std::invalid_argument("eps_volume_error: n >= 100 required");
  const ComparisonRun run = run_comparison(field_a, field_b, domain, n, seed, policy, cfg, {}, jobs);
  return eps_volume_from_run(run, eps);
}

bool is_eps_delta_close(const ClosenessReport& report, double delta) {
  return report.ci_high < delta;
}

double ky_fan_distance(const std::vector<double>& sup_distances, std::vector<double> eps_grid,
                       int refine_rounds) {
  if (eps_grid.empty()) throw std::invalid_argument("ky_fan_distance: empty grid");
  std::sort(eps_grid.begin(), eps_grid.end());
  std::vector<double> sorted = sup_distances;
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());

  auto exceed_fraction = [&](double eps) {
    // count of sup > eps
    const auto it = std::upper_bound(sorted.begin(), sorted.end(), eps);
    return static_cast<double>(sorted.end() - it) / n;
  };
  auto ok = [&](double eps) { return exceed_fraction(eps) < eps; };

  // Smallest grid point satisfying the Ky Fan condition (monotone predicate).
  auto smallest_ok = [&](const std::vector<double>& grid) -> int {
    int lo = 0, hi = static_cast<int>(grid.size()) - 1;
    if (!ok(grid[static_cast<std::size_t>(hi)])) return -1;
    while (lo < hi) {
      const int mid = (lo + hi) / 2;
      if (ok(grid[static_cast<std::size_t>(mid)]))
        hi = mid;
      else
        lo = mid + 1;
    }
    return lo;
  };

  int idx = smallest_ok(eps_grid);
  if (idx < 0) return eps_grid.back();
  double best = eps_grid[static_cast<std::size_t>(idx)];
  double left = idx > 0 ? eps_grid[static_cast<std::size_t>(idx - 1)] : 0.0;

  for (int round = 0; round < refine_rounds; ++round) {
    const double mid = 0.5 * (left + best);
    if (ok(mid))
      best = mid;
    else
      left = mid;
  }
  return best;
}

LpReport lp_from_run(const ComparisonRun& run, double p) {
  auto it = std::find(run.ps.begin(), run.ps.end(), p);
  if (it == run.ps.end()) throw std::invalid_argument("lp_from_run: p not measured in this run");
  const std::size_t j = static_cast<std::size_t>(it - run.ps.begin());

  LpReport rep;
  rep.p = p;
  rep.n = static_cast<int>(run.results.size());
  rep.seed = run.seed;
  double acc = 0.0, acc2 = 0.0;
  for (const auto& r : run.results) {
    rep.per_sample.push_back(r.lp[j]);
    rep.per_sample_2x.push_back(r.lp_2x[j]);
    rep.horizons.push_back(r.horizon);
    acc += r.lp[j];
    acc2 += r.lp_2x[j];
  }
  rep.average = acc / rep.n;
  rep.average_2x = acc2 / rep.n;
  rep.horizon_suspect =
      std::abs(rep.average_2x - rep.average) > 0.05 * std::max(rep.average, 1e-300);
  return rep;
}

LpReport lp_error(const VectorField& field_a, const VectorField& field_b, double p,
                  const Domain& domain, int n, std::uint64_t seed, const HorizonPolicy& policy,
                  const IntegratorConfig& cfg, int jobs) {
  if (!(p >= 1.0)) throw std::invalid_argument("lp_error: p >= 1 required");
  const ComparisonRun run = run_comparison(field_a, field_b, domain, n, seed, policy, cfg, {p}, jobs);
  return lp_from_run(run, p);
}

LpBoundCheck check_lp_bound(const LpReport& lp, const ClosenessReport& certificate, double eps,
                            double delta, double diameter) {
  if (certificate.n != lp.n || certificate.seed != lp.seed)
    throw std::invalid_argument("check_lp_bound: certificate comes from a different sample set");
  if (certificate.eps != eps)
    throw std::invalid_argument("check_lp_bound: certificate eps differs");
  if (!is_eps_delta_close(certificate, delta))
    throw std::invalid_argument("check_lp_bound: (eps, delta) closeness not certified");
  LpBoundCheck out;
  out.bound = std::pow(eps, lp.p) + delta * std::pow(diameter, lp.p);
  out.margin = out.bound - lp.average;
  out.holds = lp.average <= out.bound;
  return out;
}

const char* to_string(TaxonomyLabel label) {
  switch (label) {
    case TaxonomyLabel::WithinEps: return "within-eps";
    case TaxonomyLabel::BType: return "b-type";
    case TaxonomyLabel::PType: return "p-type";
    case TaxonomyLabel::Other: return "other";
  }
  return "?";
}

std::vector<double> section_crossing_times(const VectorField& field,
                                           const PoincareSection& section, const Vec& x0,
                                           int wanted, const IntegratorConfig& cfg,
                                           double t_max) {
  std::vector<double> out;
  IntegratorConfig c = cfg;
  c.guard.reset();
  c.max_time = std::max(c.max_time, 2.0 * t_max);
  OdeStepper stepper(field, x0, 0.0, c);
  std::size_t scanned = 1;
  bool lifted = std::abs(section.offset(x0)) > 1e-6;
  double window = 1.0;

  while (stepper.t() < t_max && static_cast<int>(out.size()) < wanted && !stepper.stopped()) {
    stepper.advance_to(std::min(stepper.t() + window, t_max));
    const Trajectory& traj = stepper.trajectory();
    const auto& times = traj.times();
    for (; scanned < times.size(); ++scanned) {
      const double g0 = section.offset(traj.state(scanned - 1));
      const double g1 = section.offset(traj.state(scanned));
      if (!lifted) {
        if (std::abs(g1) > 1e-6) lifted = true;
        continue;
      }
      if (g0 < 0.0 && g1 >= 0.0) {
        // Bisection refinement on the dense output.
        double lo = times[scanned - 1], hi = times[scanned];
        double glo = g0;
        for (int it = 0; it < 100; ++it) {
          const double tm = 0.5 * (lo + hi);
          const double gm = section.offset(traj.at(tm));
          if (std::abs(gm) < 1e-12 || hi - lo < 1e-14 * std::max(1.0, tm)) {
            lo = hi = tm;
            break;
          }
          if ((gm < 0.0) == (glo < 0.0)) {
            lo = tm;
            glo = gm;
          } else {
            hi = tm;
          }
        }
        out.push_back(0.5 * (lo + hi));
        if (static_cast<int>(out.size()) >= wanted) return out;
      }
    }
    window = std::min(window * 2.0, 0.25 * t_max);
  }
  return out;
}

PhaseDriftResult phase_drift(const VectorField& field_a, const LimitCycle& cycle_a,
                             const Vec& x0_a, const VectorField& field_b,
                             const LimitCycle& cycle_b, const Vec& x0_b, int n_periods,
                             const IntegratorConfig& cfg, int skip_revs) {
  const double t_ref = cycle_a.period;
  const int wanted = n_periods + skip_revs + 2;
  const double t_max = (wanted + 2) * std::max(cycle_a.period, cycle_b.period);

  const auto ta = section_crossing_times(field_a, cycle_a.section, x0_a, wanted, cfg, t_max);
  const auto tb = section_crossing_times(field_b, cycle_b.section, x0_b, wanted, cfg, t_max);
  const int k = static_cast<int>(std::min(ta.size(), tb.size()));
  if (k - skip_revs < 3) throw NonReturningError(t_max);

  std::vector<double> revs, phases;
  for (int i = skip_revs; i < k; ++i) {
    revs.push_back(static_cast<double>(i));
    phases.push_back(2.0 * M_PI * (tb[static_cast<std::size_t>(i)] - ta[static_cast<std::size_t>(i)]) / t_ref);
  }
  const LineFit fit = least_squares_line(revs, phases);
  PhaseDriftResult out;
  out.slope_per_rev = fit.slope;
  out.r2 = fit.r2;
  out.revolutions = k - skip_revs;
  return out;
}

PhaseDriftResult phase_drift(const VectorField& field_a, const VectorField& field_b,
                             const LimitCycle& cycle_a, const LimitCycle& cycle_b, const Vec& x0,
                             int n_periods, const IntegratorConfig& cfg) {
  return phase_drift(field_a, cycle_a, x0, field_b, cycle_b, x0, n_periods, cfg);
}

std::vector<TaxonomyResult> classify_errors(const VectorField& field_a,
                                            const VectorField& field_b, double eps,
                                            const ComparisonRun& run,
                                            const AttractorRegistry& reg_a,
                                            const AttractorRegistry& reg_b,
                                            const std::vector<int>& matching,
                                            const IntegratorConfig& cfg) {
  std::vector<TaxonomyResult> out(run.results.size());
  for (std::size_t i = 0; i < run.results.size(); ++i) {
    const SampleComparison& r = run.results[i];
    TaxonomyResult& t = out[i];
    t.attractor_a = r.label_a;
    t.attractor_b = r.label_b;
    if (r.sup <= eps) {
      t.label = TaxonomyLabel::WithinEps;
      continue;
    }
    if (r.label_a >= 0 && r.label_b >= 0 &&
        matching[static_cast<std::size_t>(r.label_a)] != r.label_b) {
      t.label = TaxonomyLabel::BType;
      continue;
    }
    const bool both_cycles = r.label_a >= 0 && r.label_b >= 0 &&
                             reg_a[static_cast<std::size_t>(r.label_a)].kind == Attractor::Kind::Cycle &&
                             reg_b[static_cast<std::size_t>(r.label_b)].kind == Attractor::Kind::Cycle;
    if (both_cycles) {
      const auto& ca = *reg_a[static_cast<std::size_t>(r.label_a)].cycle;
      const auto& cb = *reg_b[static_cast<std::size_t>(r.label_b)].cycle;
      try {
        const PhaseDriftResult drift =
            phase_drift(field_a, ca, run.samples[i], field_b, cb, run.samples[i], 15, cfg, 5);
        if (drift.revolutions >= 10 && drift.r2 > 0.9 && std::abs(drift.slope_per_rev) > 0.0) {
          t.label = TaxonomyLabel::PType;
          t.drift_slope = drift.slope_per_rev;
          t.drift_r2 = drift.r2;
          continue;
        }
      } catch (const NonReturningError&) {
        // fall through to Other
      }
    }
    t.label = TaxonomyLabel::Other;
  }
  return out;
}

}  // namespace approx
