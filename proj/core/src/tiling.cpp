#include "approx/tiling.hpp"

#include <cmath>

#include "approx/parallel.hpp"
#include "approx/smoothstep.hpp"
#include "approx/stats.hpp"

namespace approx {

namespace {

// Tangential term theta' += g(theta) as a Cartesian field contribution
// (-g*y, g*x) with g = -eps_t * sin(k*theta).
VectorField ring_tiling_term(int k, double eps_t) {
  return VectorField(
      2,
      [k, eps_t](const Vec& x) {
        const double theta = std::atan2(x[1], x[0]);
        const double g = -eps_t * std::sin(k * theta);
        return make_vec({-g * x[1], g * x[0]});
      },
      [k, eps_t](const Vec& x) {
        const double r2 = std::max(x[0] * x[0] + x[1] * x[1], 1e-30);
        const double theta = std::atan2(x[1], x[0]);
        const double g = -eps_t * std::sin(k * theta);
        const double dg = -eps_t * k * std::cos(k * theta);
        // grad theta = (-y, x)/r^2
        Mat j(2, 2);
        j(0, 0) = -x[1] * dg * (-x[1] / r2);
        j(0, 1) = -g - x[1] * dg * (x[0] / r2);
        j(1, 0) = g + x[0] * dg * (-x[1] / r2);
        j(1, 1) = x[0] * dg * (x[0] / r2);
        return j;
      },
      "ring-tiling");
}

}  // namespace

TiledRing tile_ring(double kappa, const TilingSpec& spec) {
  if (spec.k < 2) throw std::invalid_argument("tile_ring: k >= 2 required");
  if (!(spec.eps_t > 0.0)) throw std::invalid_argument("tile_ring: eps_t must be positive");

  TiledRing out;
  out.spacing = 2.0 * M_PI / spec.k;
  out.normal_hyperbolicity_warning = spec.eps_t * spec.k >= 2.0 * kappa;

  const VectorField ring = ring_attractor_field(kappa);
  const VectorField term = ring_tiling_term(spec.k, spec.eps_t);
  out.field = make_perturbed(ring, term, 1.0);

  for (int j = 0; j < spec.k; ++j) {
    const double th_sink = 2.0 * M_PI * j / spec.k;
    const double th_saddle = (2.0 * j + 1.0) * M_PI / spec.k;
    out.sinks.push_back(make_vec({std::cos(th_sink), std::sin(th_sink)}));
    out.saddles.push_back(make_vec({std::cos(th_saddle), std::sin(th_saddle)}));
  }
  return out;
}

TiledLine tile_line(double a, double b, double kappa_t, double lambda_n, const TilingSpec& spec) {
  if (spec.k < 2) throw std::invalid_argument("tile_line: k >= 2 required");
  if (!(b > a)) throw std::invalid_argument("tile_line: need a < b");

  TiledLine out;
  const double h = (b - a) / (2.0 * spec.k - 2.0);  // half-spacing between sinks
  out.spacing = (b - a) / (spec.k - 1);

  // Windowed tangential term: zeros at a + m*h (sinks at even m including the
  // endpoints, saddles at odd m); the window kills the term beyond [a-h, b+h]
  // where it shares the hinge's sign, so no stray equilibria appear.
  const double eps_t = spec.eps_t;
  auto window = [a, b, h](double x) {
    return plateau(std::max(a - x, x - b), 0.0, h);
  };
  auto window_d = [a, b, h](double x) {
    const double d = std::max(a - x, x - b);
    if (d <= 0.0 || d >= h) return 0.0;
    return plateau_deriv(d, 0.0, h) * (x > b ? 1.0 : -1.0);
  };
  VectorField term(
      2,
      [=](const Vec& x) {
        return make_vec({-eps_t * std::sin(M_PI * (x[0] - a) / h) * window(x[0]), 0.0});
      },
      [=](const Vec& x) {
        Mat j = Mat::Zero(2, 2);
        j(0, 0) = -eps_t * (M_PI / h) * std::cos(M_PI * (x[0] - a) / h) * window(x[0]) -
                  eps_t * std::sin(M_PI * (x[0] - a) / h) * window_d(x[0]);
        return j;
      },
      "line-tiling");

  out.field = make_perturbed(line_attractor_field(a, b, kappa_t, lambda_n), term, 1.0);
  out.normal_hyperbolicity_warning = eps_t * M_PI / h >= lambda_n;
  for (int m = 0; m < 2 * spec.k - 1; ++m) {
    const Vec p = make_vec({a + m * h, 0.0});
    if (m % 2 == 0)
      out.sinks.push_back(p);
    else
      out.saddles.push_back(p);
  }
  return out;
}

TiledCylinder tile_iso_cylinder(double kappa, double omega, double z_lo, double z_hi,
                                const TilingSpec& spec, const IntegratorConfig& cfg,
                                double isochrony_tol, double freq_gradient) {
  if (spec.k < 2) throw std::invalid_argument("tile_iso_cylinder: k >= 2 required");
  if (!(z_hi > z_lo)) throw std::invalid_argument("tile_iso_cylinder: need z_lo < z_hi");

  VectorField cylinder = iso_cylinder_field(kappa, omega, AxialMode::None);
  if (freq_gradient != 0.0) {
    const VectorField gradient_term(
        3,
        [freq_gradient](const Vec& x) {
          const double c = freq_gradient * x[2];
          return make_vec({-c * x[1], c * x[0], 0.0});
        },
        [freq_gradient](const Vec& x) {
          Mat j = Mat::Zero(3, 3);
          const double c = freq_gradient * x[2];
          j(0, 1) = -c;
          j(1, 0) = c;
          j(0, 2) = -freq_gradient * x[1];
          j(1, 2) = freq_gradient * x[0];
          return j;
        },
        "frequency-gradient");
    cylinder = make_perturbed(cylinder, gradient_term, 1.0);
  }
  const double t_common = 2.0 * M_PI / omega;

  // Isochrony check: measured periods of the foliation cycles at sampled
  // heights must agree.
  TiledCylinder out;
  {
    std::vector<double> periods;
    for (double z : {z_lo, 0.5 * (z_lo + z_hi), z_hi}) {
      const LimitCycle c = find_limit_cycle(cylinder, make_vec({1.0, 0.0, z}), cfg);
      periods.push_back(c.period);
    }
    const auto [mn, mx] = std::minmax_element(periods.begin(), periods.end());
    out.isochrony_spread = (*mx - *mn) / t_common;
    if (out.isochrony_spread > isochrony_tol) throw IsochronyError(out.isochrony_spread, isochrony_tol);
  }

  // Axial tiling: k stable z-levels (ends included), saddles between.
  const double hz = (z_hi - z_lo) / (2.0 * spec.k - 2.0);
  out.spacing = (z_hi - z_lo) / (spec.k - 1);
  const double axial_eps = spec.axial_eps;
  auto axial_window = [z_lo, z_hi, hz](double z) {
    return plateau(std::max(z_lo - z, z - z_hi), 0.0, hz);
  };
  auto axial_window_d = [z_lo, z_hi, hz](double z) {
    const double d = std::max(z_lo - z, z - z_hi);
    if (d <= 0.0 || d >= hz) return 0.0;
    return plateau_deriv(d, 0.0, hz) * (z > z_hi ? 1.0 : -1.0);
  };
  const double detune = spec.detune;
  VectorField term(
      3,
      [=](const Vec& x) {
        Vec f = Vec::Zero(3);
        f[2] = -axial_eps * std::sin(M_PI * (x[2] - z_lo) / hz) * axial_window(x[2]);
        if (detune != 0.0) {
          // Tangential rate modulation: leaves the circles in place but
          // de-tunes their periods with height.
          const double c = detune * std::sin(1.0 + x[2]);
          f[0] += -c * x[1];
          f[1] += c * x[0];
        }
        return f;
      },
      [=](const Vec& x) {
        Mat j = Mat::Zero(3, 3);
        j(2, 2) = -axial_eps * (M_PI / hz) * std::cos(M_PI * (x[2] - z_lo) / hz) * axial_window(x[2]) -
                  axial_eps * std::sin(M_PI * (x[2] - z_lo) / hz) * axial_window_d(x[2]);
        if (detune != 0.0) {
          const double c = detune * std::sin(1.0 + x[2]);
          const double dc = detune * std::cos(1.0 + x[2]);
          j(0, 1) = -c;
          j(1, 0) = c;
          j(0, 2) = -dc * x[1];
          j(1, 2) = dc * x[0];
        }
        return j;
      },
      "cylinder-tiling");

  out.uncorrected = make_perturbed(cylinder, term, 1.0);
  out.common_period = t_common;
  for (int j = 0; j < spec.k; ++j) out.z_levels.push_back(z_lo + j * out.spacing);

  // Locate the tiled cycles, then retune all periods to the common target.
  CorrectionProblem problem;
  problem.base = out.uncorrected;
  for (double z : out.z_levels)
    problem.cycles.push_back(find_limit_cycle(out.uncorrected, make_vec({1.0, 0.0, z}), cfg));
  const TubeRadii radii = default_tube_radii(out.spacing);
  for (const auto& cycle : problem.cycles)
    problem.bumps.emplace_back(cycle, radii.r_in, radii.r_out);
  problem.target_periods.assign(out.z_levels.size(), t_common);

  out.correction = multiplicative_correction(problem, cfg);
  out.field = out.correction.corrected;
  for (const auto& cycle : problem.cycles)
    out.cycles.push_back(find_limit_cycle(out.field, cycle.section, cycle.anchor, cfg));
  return out;
}

std::optional<Vec> asymptotic_state(const VectorField& field, const Vec& x0,
                                    const IntegratorConfig& cfg, const Domain& domain,
                                    double t_max, double tol) {
  IntegratorConfig guarded = cfg;
  if (!guarded.guard) guarded.guard = domain.inflated(1e-9 * domain.extent());
  guarded.max_time = std::max(guarded.max_time, 2.0 * t_max);
  OdeStepper stepper(field, x0, 0.0, guarded);
  Vec prev = x0;
  while (stepper.t() < t_max) {
    if (stepper.advance_to(std::min(stepper.t() + 1.0, t_max)) != StopReason::ReachedEnd)
      return std::nullopt;
    const Vec cur = stepper.state();
    if ((cur - prev).norm() < tol) return cur;
    prev = cur;
  }
  return std::nullopt;
}

TilingReport measure_dtype_error(const VectorField& original, const VectorField& tiled,
                                 const AttractorRegistry& tiled_registry, double spacing,
                                 const Domain& domain, const std::vector<Vec>& samples,
                                 const IntegratorConfig& cfg, double t_max, int jobs) {
  TilingReport report;
  report.spacing = spacing;
  report.n_samples = static_cast<int>(samples.size());

  std::vector<double> disp(samples.size(), -1.0);  // -1 marks unresolved
  parallel_for(static_cast<int>(samples.size()), jobs, [&](int i) {
    const Vec& x0 = samples[static_cast<std::size_t>(i)];
    const auto limit = asymptotic_state(original, x0, cfg, domain, t_max);
    if (!limit) return;
    const LabelResult lab = label_basin(tiled, tiled_registry, x0, cfg, t_max, domain);
    if (!resolved(lab)) return;
    disp[static_cast<std::size_t>(i)] = tiled_registry[static_cast<std::size_t>(lab.id)].distance(*limit);
  });

  int exceeding = 0;
  for (double d : disp) {
    if (d < 0.0) {
      ++report.n_unresolved;
      continue;
    }
    report.displacements.push_back(d);
    report.max_displacement = std::max(report.max_displacement, d);
    if (d > spacing) ++exceeding;
  }
  if (!report.displacements.empty()) {
    report.p99_displacement = percentile(report.displacements, 0.99);
    report.fraction_exceeding_spacing =
        static_cast<double>(exceeding) / static_cast<double>(report.displacements.size());
  }
  return report;
}

}  // namespace approx
