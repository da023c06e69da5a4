#include "approx/basin.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "approx/fields.hpp"
#include "approx/parallel.hpp"
#include "approx/stats.hpp"

namespace approx {

void AttractorRegistry::add(const FixedPoint& fp) {
  if (fp.kind != FixedPointKind::Stable)
    throw std::invalid_argument("AttractorRegistry: fixed point is not stable");
  Attractor a;
  a.kind = Attractor::Kind::Point;
  a.id = static_cast<int>(list_.size());
  a.fp = fp;
  a.rate = spectral_gap(fp);
  list_.push_back(std::move(a));
  finalized_ = false;
}

void AttractorRegistry::add(LimitCycle cycle) {
  if (!cycle.hyperbolic)
    throw std::invalid_argument("AttractorRegistry: cycle is not hyperbolic");
  const double rate = cycle.contraction_rate();
  if (rate <= 0.0) throw std::invalid_argument("AttractorRegistry: cycle is not attracting");
  Attractor a;
  a.kind = Attractor::Kind::Cycle;
  a.id = static_cast<int>(list_.size());
  a.cycle = std::make_shared<const LimitCycle>(std::move(cycle));
  a.rate = rate;
  list_.push_back(std::move(a));
  finalized_ = false;
}

void AttractorRegistry::finalize(const Domain& domain, double radius_factor) {
  if (list_.empty()) throw std::invalid_argument("AttractorRegistry: empty");
  min_separation_ = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < list_.size(); ++i) {
    for (std::size_t j = i + 1; j < list_.size(); ++j) {
      // Set-to-set distance approximated on samples/representatives.
      double d;
      if (list_[i].kind == Attractor::Kind::Point) {
        d = list_[j].distance(list_[i].fp.location);
      } else {
        d = std::numeric_limits<double>::infinity();
        for (const Vec& p : list_[i].cycle->points) d = std::min(d, list_[j].distance(p));
      }
      min_separation_ = std::min(min_separation_, d);
    }
  }
  if (list_.size() == 1) min_separation_ = 0.5 * domain.extent();
  if (!(min_separation_ > 0.0))
    throw std::invalid_argument("AttractorRegistry: attractors are not separated");
  for (auto& a : list_) a.capture_radius = radius_factor * min_separation_;
  finalized_ = true;
}

LabelResult label_with_stepper(OdeStepper& stepper, const AttractorRegistry& registry,
                               double t_max) {
  if (!registry.finalized())
    throw std::invalid_argument("label_basin: registry not finalized");

  const auto& attractors = registry.attractors();
  std::vector<double> enter(attractors.size(), -1.0);
  std::size_t scanned = 0;

  double window = 0.0;
  for (const auto& a : attractors) window = std::max(window, 0.5 * a.relaxation_time());

  while (true) {
    const Trajectory& traj = stepper.trajectory();
    const auto& times = traj.times();
    for (; scanned < times.size(); ++scanned) {
      const double t = times[scanned];
      for (std::size_t k = 0; k < attractors.size(); ++k) {
        const double d = attractors[k].distance(traj.state(scanned));
        if (d < attractors[k].capture_radius) {
          if (enter[k] < 0.0) enter[k] = t;
          if (t - enter[k] >= attractors[k].relaxation_time())
            return {attractors[k].id, false, enter[k], t};
        } else {
          enter[k] = -1.0;
        }
      }
    }
    if (stepper.stopped())
      return {-1, stepper.trajectory().reason() == StopReason::EscapedDomain, 0.0, stepper.t()};
    if (stepper.t() >= t_max) return {-1, false, 0.0, stepper.t()};
    stepper.advance_to(std::min(stepper.t() + window, t_max));
  }
}

LabelResult label_basin(const VectorField& field, const AttractorRegistry& registry,
                        const Vec& x0, const IntegratorConfig& cfg, double t_max,
                        const Domain& domain) {
  IntegratorConfig guarded = cfg;
  if (!guarded.guard) guarded.guard = domain.inflated(1e-9 * domain.extent());
  OdeStepper stepper(field, x0, 0.0, guarded);
  return label_with_stepper(stepper, registry, t_max);
}

BasinLabeling label_basin_bulk(const VectorField& field, const AttractorRegistry& registry,
                               const Domain& domain, const SamplerSpec& sampler,
                               const IntegratorConfig& cfg, double t_max, int jobs) {
  BasinLabeling out;
  out.sampler = sampler;
  const auto samples = sample_domain(domain, sampler);
  out.labels.resize(samples.size());
  parallel_for(static_cast<int>(samples.size()), jobs, [&](int i) {
    out.labels[static_cast<std::size_t>(i)] =
        label_basin(field, registry, samples[static_cast<std::size_t>(i)], cfg, t_max, domain);
  });
  for (const auto& r : out.labels) {
    if (!resolved(r)) ++out.n_unresolved;
    if (r.escaped) ++out.n_escaped;
  }
  return out;
}

std::vector<int> match_registries(const AttractorRegistry& a, const AttractorRegistry& b) {
  if (a.size() != b.size()) throw TopologyChangedError(a.size(), b.size());
  const double limit = 0.5 * std::min(a.min_separation(), b.min_separation());

  const std::size_t n = a.size();
  std::vector<int> match(n, -1);
  std::vector<bool> taken(n, false);
  // Greedy nearest-pair assignment (n is tiny).
  for (std::size_t round = 0; round < n; ++round) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t bi = n, bj = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (match[i] >= 0) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (taken[j]) continue;
        const double d = (a[i].representative() - b[j].representative()).norm();
        if (d < best) {
          best = d;
          bi = i;
          bj = j;
        }
      }
    }
    if (best > limit)
      throw TopologyChangedError("nearest attractor pairing distance " + std::to_string(best) +
                                 " exceeds half the minimum separation");
    match[bi] = static_cast<int>(bj);
    taken[bj] = true;
  }
  return match;
}

MismatchReport basin_mismatch_volume(const VectorField& field_a, const VectorField& field_b,
                                     const AttractorRegistry& reg_a,
                                     const AttractorRegistry& reg_b,
                                     const std::vector<int>& matching, const Domain& domain,
                                     int n, std::uint64_t seed, const IntegratorConfig& cfg,
                                     double t_max, int jobs) {
  if (matching.size() != reg_a.size())
    throw std::invalid_argument("basin_mismatch_volume: matching size mismatch");

  const auto samples = sample_domain(domain, {SamplerKind::LowDiscrepancy, n, seed});
  std::vector<char> mismatch(samples.size(), 0);
  std::vector<char> unresolved(samples.size(), 0);

  parallel_for(n, jobs, [&](int i) {
    const Vec& x0 = samples[static_cast<std::size_t>(i)];
    const LabelResult la = label_basin(field_a, reg_a, x0, cfg, t_max, domain);
    const LabelResult lb = label_basin(field_b, reg_b, x0, cfg, t_max, domain);
    if (!resolved(la) || !resolved(lb)) {
      unresolved[static_cast<std::size_t>(i)] = 1;
      mismatch[static_cast<std::size_t>(i)] = 1;  // conservative
    } else if (matching[static_cast<std::size_t>(la.id)] != lb.id) {
      mismatch[static_cast<std::size_t>(i)] = 1;
    }
  });

  MismatchReport rep;
  rep.n = n;
  rep.seed = seed;
  for (int i = 0; i < n; ++i) {
    if (mismatch[static_cast<std::size_t>(i)]) {
      ++rep.n_mismatch;
      rep.mismatched_indices.push_back(i);
      rep.mismatched_points.push_back(samples[static_cast<std::size_t>(i)]);
    }
    if (unresolved[static_cast<std::size_t>(i)]) ++rep.n_unresolved;
  }
  rep.delta_hat = static_cast<double>(rep.n_mismatch) / n;
  const WilsonInterval ci = wilson_95(rep.n_mismatch, n);
  rep.ci_low = ci.lo;
  rep.ci_high = ci.hi;
  return rep;
}

double locate_separatrix_1d(const VectorField& field, const AttractorRegistry& registry,
                            double lo, double hi, double tol, const IntegratorConfig& cfg,
                            double t_max, const Domain& domain) {
  if (field.dimension() != 1)
    throw std::invalid_argument("locate_separatrix_1d: field must be 1D");
  auto label = [&](double x) {
    return label_basin(field, registry, make_vec({x}), cfg, t_max, domain).id;
  };
  int l_lo = label(lo);
  const int l_hi = label(hi);
  if (l_lo < 0 || l_hi < 0 || l_lo == l_hi)
    throw std::invalid_argument("locate_separatrix_1d: bracket endpoints must resolve to "
                                "different attractors");
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    int l_mid = label(mid);
    if (l_mid < 0) {
      // Unresolved midpoint: probe a nearby offset; if the strip is wider
      // than the probe, the midpoint is our best separatrix estimate.
      l_mid = label(mid + 0.25 * (hi - lo));
      if (l_mid < 0) return mid;
      if (l_mid == l_lo) {
        lo = mid + 0.25 * (hi - lo);
        continue;
      }
      hi = mid + 0.25 * (hi - lo);
      continue;
    }
    if (l_mid == l_lo)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

namespace {

AttractorRegistry stable_registry(const VectorField& field, const Domain& domain) {
  AttractorRegistry reg;
  for (const FixedPoint& fp : find_fixed_points(field, domain, 16))
    if (fp.kind == FixedPointKind::Stable) reg.add(fp);
  reg.finalize(domain);
  return reg;
}

int count_stable(const VectorField& field, const Domain& domain) {
  int k = 0;
  for (const FixedPoint& fp : find_fixed_points(field, domain, 16))
    if (fp.kind == FixedPointKind::Stable) ++k;
  return k;
}

}  // namespace

ScalingFit basin_scaling_experiment(const VectorField& base, const VectorField& g,
                                    const std::vector<double>& nu_list, const Domain& domain,
                                    int n, std::uint64_t seed, const IntegratorConfig& cfg,
                                    double t_max, int jobs) {
  ScalingFit fit;
  const AttractorRegistry reg_base = stable_registry(base, domain);
  const int n_base = static_cast<int>(reg_base.size());

  std::vector<double> xs, ys;
  for (std::size_t k = 0; k < nu_list.size(); ++k) {
    const double nu = nu_list[k];
    ScalingRow row;
    row.nu = nu;
    const VectorField pert = make_perturbed(base, g, nu);
    if (count_stable(pert, domain) != n_base) {
      row.topology_changed = true;
      fit.rows.push_back(row);
      continue;
    }
    const AttractorRegistry reg_pert = stable_registry(pert, domain);
    const auto matching = match_registries(reg_base, reg_pert);
    const std::uint64_t row_seed = SampleRng::hash(seed ^ (0x5eedULL + k));
    const MismatchReport rep = basin_mismatch_volume(base, pert, reg_base, reg_pert, matching,
                                                     domain, n, row_seed, cfg, t_max, jobs);
    row.delta_hat = rep.delta_hat;
    row.ci_low = rep.ci_low;
    row.ci_high = rep.ci_high;
    fit.rows.push_back(row);
    xs.push_back(nu);
    ys.push_back(rep.delta_hat);
  }
  if (xs.size() >= 2) {
    const OriginFit of = ols_through_origin(xs, ys);
    fit.slope = of.slope;
    fit.r2 = of.r2;
  }
  return fit;
}

}  // namespace approx
