#include "experiments.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "approx/closeness.hpp"
#include "approx/correction.hpp"
#include "approx/fields.hpp"
#include "approx/rbf.hpp"
#include "approx/stats.hpp"
#include "approx/tiling.hpp"
#include "report_io.hpp"

namespace approx::cli {

namespace {

namespace fs = std::filesystem;

VectorField make_g(const std::string& id) {
  if (id == "neg-cos-2x") return neg_cos_2x_field();
  if (id == "constant-down")
    return VectorField(1, [](const Vec&) { return make_vec({-1.0}); },
                       [](const Vec&) { return Mat(Mat::Zero(1, 1)); }, "constant-down");
  throw ConfigError("unknown perturbation '" + id + "'");
}

AttractorRegistry stable_registry(const VectorField& field, const Domain& domain) {
  AttractorRegistry reg;
  for (const auto& fp : find_fixed_points(field, domain, 16))
    if (fp.kind == FixedPointKind::Stable) reg.add(fp);
  reg.finalize(domain);
  return reg;
}

int count_stable(const VectorField& field, const Domain& domain) {
  int k = 0;
  for (const auto& fp : find_fixed_points(field, domain, 16))
    if (fp.kind == FixedPointKind::Stable) ++k;
  return k;
}

void check(ExperimentOutcome& out, bool ok, const std::string& criterion,
           const std::string& detail) {
  if (ok) return;
  out.exit_code = 2;
  out.failures.push_back(criterion + ": " + detail);
}

std::string opath(const ExperimentConfig& cfg, const std::string& name) {
  return (fs::path(cfg.out_dir) / name).string();
}

void record_output(ExperimentOutcome& out, const std::string& path) {
  out.summary["outputs"].push_back(path);
}

bool sample_mismatched(const SampleComparison& r, const std::vector<int>& matching) {
  return r.label_a < 0 || r.label_b < 0 ||
         matching[static_cast<std::size_t>(r.label_a)] != r.label_b;
}

std::uint64_t row_seed(std::uint64_t master, std::size_t index) {
  return SampleRng::hash(master ^ (0xb15ULL + 0x9e37ULL * (index + 1)));
}

}  // namespace

ExperimentOutcome run_bistable_sweep(const ExperimentConfig& cfg) {
  ExperimentOutcome out;
  const VectorField base = make_field(cfg.field_id, cfg.field_params);
  const Domain domain = default_domain(cfg.field_id);
  const VectorField g = make_g(cfg.g_id);
  const double diameter = domain.diameter();
  const IntegratorConfig icfg = IntegratorConfig::sweep();
  const AttractorRegistry reg_base = stable_registry(base, domain);
  const int n_base = static_cast<int>(reg_base.size());

  CsvWriter csv("bistable sweep: per-nu eps-volume/Lp measurements; margin = bound - l2_avg",
                {"nu", "eps_hat", "delta_hat", "l1_avg", "l2_avg", "bound", "margin",
                 "topology_changed", "n_unresolved", "n_capped"});

  std::vector<double> nus_ok, deltas_ok, l2s, bounds;
  nlohmann::json rows = nlohmann::json::array();

  for (std::size_t i = 0; i < cfg.nu_list.size(); ++i) {
    const double nu = cfg.nu_list[i];
    const VectorField pert = make_perturbed(base, g, nu);

    if (count_stable(pert, domain) != n_base) {
      csv.add_row({nu, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1ll, 0ll, 0ll});
      rows.push_back({{"nu", nu}, {"topology_changed", true}});
      continue;
    }
    const AttractorRegistry reg_pert = stable_registry(pert, domain);
    const auto matching = match_registries(reg_base, reg_pert);
    const HorizonPolicy policy = HorizonPolicy::converge(reg_base, reg_pert, cfg.t_max);
    const ComparisonRun run = run_comparison(base, pert, domain, cfg.n_samples,
                                             row_seed(cfg.seed, i), policy, icfg, {1.0, 2.0},
                                             cfg.jobs);

    int n_mismatch = 0, n_unresolved = 0, n_capped = 0;
    double eps_hat = 0.0, l1 = 0.0, l2 = 0.0;
    for (const auto& r : run.results) {
      const bool bad = sample_mismatched(r, matching);
      if (bad) ++n_mismatch;
      if (r.label_a < 0 || r.label_b < 0) ++n_unresolved;
      if (r.capped) ++n_capped;
      if (!bad) eps_hat = std::max(eps_hat, r.sup);
      l1 += r.lp[0];
      l2 += r.lp[1];
    }
    const double n = static_cast<double>(run.results.size());
    l1 /= n;
    l2 /= n;
    const double delta_hat = n_mismatch / n;
    const double bound = eps_hat * eps_hat + delta_hat * diameter * diameter;
    const double margin = bound - l2;

    check(out, margin >= 0.0,
          "bistable-margin", "nu=" + format_shortest(nu) + " margin=" + format_shortest(margin));
    // Partition identity at both p values, exactly as measured.
    const double bound1 = eps_hat + delta_hat * diameter;
    const double mid1 = (1.0 - delta_hat) * eps_hat + delta_hat * diameter;
    const double mid2 = (1.0 - delta_hat) * eps_hat * eps_hat +
                        delta_hat * diameter * diameter;
    check(out, l1 <= mid1 && mid1 <= bound1, "partition-identity",
          "p=1 nu=" + format_shortest(nu));
    check(out, l2 <= mid2 && mid2 <= bound, "partition-identity",
          "p=2 nu=" + format_shortest(nu));

    csv.add_row({nu, eps_hat, delta_hat, l1, l2, bound, margin, 0ll,
                 static_cast<long long>(n_unresolved), static_cast<long long>(n_capped)});
    rows.push_back({{"nu", nu},
                    {"eps_hat", eps_hat},
                    {"delta_hat", delta_hat},
                    {"l1_avg", l1},
                    {"l2_avg", l2},
                    {"bound", bound},
                    {"margin", margin},
                    {"n_unresolved", n_unresolved}});
    nus_ok.push_back(nu);
    deltas_ok.push_back(delta_hat);
    l2s.push_back(l2);
    bounds.push_back(bound);
  }

  // Linear basin-error scaling over nu <= 0.10, with the separatrix-shift
  // oracle (root of the perturbed field near 0, strip length / domain length).
  std::vector<double> fit_nus, fit_deltas, oracle_deltas;
  for (std::size_t i = 0; i < nus_ok.size(); ++i) {
    if (nus_ok[i] > 0.10 + 1e-12) continue;
    fit_nus.push_back(nus_ok[i]);
    fit_deltas.push_back(deltas_ok[i]);
    const VectorField pert = make_perturbed(base, g, nus_ok[i]);
    double lo = -0.5, hi = 0.5, flo = pert(make_vec({lo}))[0];
    for (int it = 0; it < 100; ++it) {
      const double mid = 0.5 * (lo + hi);
      const double fm = pert(make_vec({mid}))[0];
      if ((fm < 0) == (flo < 0)) {
        lo = mid;
        flo = fm;
      } else {
        hi = mid;
      }
    }
    oracle_deltas.push_back(std::abs(0.5 * (lo + hi)) / (domain.hi[0] - domain.lo[0]));
  }
  if (fit_nus.size() >= 2) {
    const OriginFit fit = ols_through_origin(fit_nus, fit_deltas);
    const OriginFit oracle = ols_through_origin(fit_nus, oracle_deltas);
    out.summary["scaling"] = {{"slope", fit.slope},
                              {"r2", fit.r2},
                              {"oracle_slope", oracle.slope},
                              {"n_points", fit_nus.size()}};
  }

  fs::create_directories(cfg.out_dir);
  csv.write(opath(cfg, "sweep.csv"));
  record_output(out, opath(cfg, "sweep.csv"));
  write_svg_lines(opath(cfg, "sweep.svg"), "Time-averaged L2 error vs perturbation size", "nu",
                  "L2 error",
                  {{"empirical", "#202020", nus_ok, l2s}, {"bound", "#d62728", nus_ok, bounds}});
  record_output(out, opath(cfg, "sweep.svg"));

  out.summary["rows"] = rows;
  out.summary["diameter"] = diameter;
  return out;
}

ExperimentOutcome run_drift_demo(const ExperimentConfig& cfg) {
  ExperimentOutcome out;
  const double h = cfg.omega_mismatch;
  const IntegratorConfig icfg = IntegratorConfig::oracle();
  const VectorField fa = radial_cycle_field(1.0, 1.0, 0.0);
  const VectorField fb = radial_cycle_field(1.0, 1.0 + h, 0.0);

  const LimitCycle ca = find_limit_cycle(fa, make_vec({1.0, 0.0}), icfg);
  const LimitCycle cb = find_limit_cycle(fb, make_vec({1.0, 0.0}), icfg);
  const CorrectionResult corr = single_cycle_scaling(fb, cb, ca.period, icfg);
  const LimitCycle cc = find_limit_cycle(corr.corrected, cb.section, cb.anchor, icfg);

  const int revs = cfg.revolutions;
  const double t_max = (revs + 4) * std::max(ca.period, cb.period);
  const Vec x0 = make_vec({1.0, 0.0});
  const auto ta = section_crossing_times(fa, ca.section, x0, revs + 1, icfg, t_max);
  const auto tb = section_crossing_times(fb, cb.section, x0, revs + 1, icfg, t_max);
  const auto tc = section_crossing_times(corr.corrected, cc.section, x0, revs + 1, icfg, t_max);
  const std::size_t k = std::min({ta.size(), tb.size(), tc.size()});

  CsvWriter csv("phase error vs revolution for an uncorrected 1% frequency mismatch and the "
                "rescaled (period-matched) field",
                {"rev", "t", "phase_uncorrected", "phase_corrected"});
  std::vector<double> revs_axis, uncorr, corrp;
  csv.add_row({0.0, 0.0, 0.0, 0.0});  // identical initial conditions
  revs_axis.push_back(0.0);
  uncorr.push_back(0.0);
  corrp.push_back(0.0);
  std::vector<double> fit_x, fit_u, fit_c;
  for (std::size_t i = 0; i < k; ++i) {
    const double pu = 2.0 * M_PI * (tb[i] - ta[i]) / ca.period;
    const double pc = 2.0 * M_PI * (tc[i] - ta[i]) / ca.period;
    csv.add_row({static_cast<double>(i + 1), ta[i], pu, pc});
    revs_axis.push_back(static_cast<double>(i + 1));
    uncorr.push_back(pu);
    corrp.push_back(pc);
    fit_x.push_back(static_cast<double>(i + 1));
    fit_u.push_back(pu);
    fit_c.push_back(pc);
  }

  const LineFit fu = least_squares_line(fit_x, fit_u);
  const LineFit fc = least_squares_line(fit_x, fit_c);
  const double analytic = 2.0 * M_PI * h / (1.0 + h);
  double sup_corr = 0.0;
  for (double pc : corrp) sup_corr = std::max(sup_corr, std::abs(pc));

  check(out, std::abs(std::abs(fu.slope) - analytic) <= 0.05 * analytic,
        "drift-uncorrected-slope",
        "measured " + format_shortest(fu.slope) + " vs analytic " + format_shortest(analytic));
  check(out, std::abs(fc.slope) < 1e-6, "drift-corrected-slope", format_shortest(fc.slope));
  check(out, sup_corr < cfg.eps, "drift-corrected-sup",
        format_shortest(sup_corr) + " vs eps " + format_shortest(cfg.eps));

  fs::create_directories(cfg.out_dir);
  csv.write(opath(cfg, "drift.csv"));
  record_output(out, opath(cfg, "drift.csv"));
  write_svg_lines(opath(cfg, "drift.svg"), "Phase error vs revolutions", "revolution",
                  "phase error [rad]",
                  {{"uncorrected", "#d62728", revs_axis, uncorr},
                   {"corrected", "#2ca02c", revs_axis, corrp}});
  record_output(out, opath(cfg, "drift.svg"));

  out.summary["uncorrected_slope"] = fu.slope;
  out.summary["corrected_slope"] = fc.slope;
  out.summary["analytic_slope"] = analytic;
  out.summary["corrected_sup"] = sup_corr;
  out.summary["correction_alpha"] = corr.alpha[0];
  return out;
}

ExperimentOutcome run_correction_demo(const ExperimentConfig& cfg) {
  ExperimentOutcome out;
  const IntegratorConfig icfg = IntegratorConfig::oracle();
  const MultiCycleSpec spec = multi_cycle_2_spec();
  const VectorField field = multi_cycle_field(spec);
  const double separation = multi_cycle_separation(spec);

  CorrectionProblem problem;
  problem.base = field;
  problem.cycles.push_back(find_limit_cycle(field, make_vec({-1.3, 0.0}), icfg));
  problem.cycles.push_back(find_limit_cycle(field, make_vec({3.7, 0.0}), icfg));
  const TubeRadii radii = default_tube_radii(separation);
  for (const auto& c : problem.cycles)
    problem.vector_bumps.push_back(make_vector_bump(field, c, radii.r_in, radii.r_out));
  for (std::size_t i = 0; i < problem.cycles.size(); ++i) {
    const double shift = i < cfg.target_shifts.size() ? cfg.target_shifts[i] : 0.0;
    problem.target_periods.push_back((1.0 + shift) * problem.cycles[i].period);
  }

  const PeriodJacobian jac = period_jacobian(field, problem.cycles, problem.vector_bumps, icfg);
  double max_nu = 0.0;
  for (const auto& b : problem.vector_bumps) max_nu = std::max(max_nu, b.alignment_nu);
  const DominanceCertificate cert = dominance_certificate(jac, max_nu, jac.zeta,
                                                          problem.cycles.size());
  check(out, cert.certified, "correction-dominance",
        "min row margin " + format_shortest(cert.min_margin));

  const CorrectionResult result = additive_correction(problem, icfg);
  check(out, result.iterations <= 5, "correction-iterations",
        std::to_string(result.iterations));
  for (std::size_t i = 0; i < result.residuals.size(); ++i)
    check(out, result.residuals[i] < 1e-6 * problem.target_periods[i], "correction-residuals",
          "cycle " + std::to_string(i) + ": " + format_shortest(result.residuals[i]));

  const VerificationReport verification =
      verify_correction(result, problem.cycles, problem.target_periods, icfg);
  check(out, verification.all_hyperbolic, "correction-hyperbolicity", "cycle lost hyperbolicity");

  CsvWriter csv("additive period-correction Newton iterations (max relative residual)",
                {"iteration", "max_rel_residual"});
  for (std::size_t i = 0; i < result.residual_history.size(); ++i)
    csv.add_row({static_cast<double>(i), result.residual_history[i]});

  nlohmann::json cj;
  cj["alpha"] = result.alpha;
  cj["achieved_periods"] = result.achieved_periods;
  cj["target_periods"] = problem.target_periods;
  cj["residuals"] = result.residuals;
  cj["iterations"] = result.iterations;
  cj["row_margins"] = result.row_margins;
  cj["c_z"] = jac.c_z;
  cj["zeta"] = jac.zeta;
  cj["max_hausdorff_shift"] = verification.max_shift;
  cj["all_hyperbolic"] = verification.all_hyperbolic;

  fs::create_directories(cfg.out_dir);
  csv.write(opath(cfg, "correction.csv"));
  record_output(out, opath(cfg, "correction.csv"));
  {
    std::ofstream js(opath(cfg, "correction.json"), std::ios::binary);
    js << cj.dump(2) << "\n";
  }
  record_output(out, opath(cfg, "correction.json"));

  out.summary["correction"] = cj;
  return out;
}

ExperimentOutcome run_tiling_study(const ExperimentConfig& cfg) {
  ExperimentOutcome out;
  const IntegratorConfig icfg = IntegratorConfig::sweep();
  const VectorField ring = ring_attractor_field(1.0);
  const Domain box(make_vec({-1.6, -1.6}), make_vec({1.6, 1.6}));

  // Annulus samples away from the unstable origin.
  std::vector<Vec> samples;
  for (int i = 0; i < cfg.n_samples; ++i) {
    const Vec u = low_discrepancy_point(2, cfg.seed, i);
    const double r = 0.4 + 1.0 * u[0];
    const double th = 2.0 * M_PI * u[1];
    samples.push_back(make_vec({r * std::cos(th), r * std::sin(th)}));
  }

  CsvWriter csv("ring tiling: asymptotic displacement vs tile count",
                {"k", "spacing", "max_displacement", "p99_displacement",
                 "fraction_exceeding_spacing", "n_unresolved"});
  std::vector<double> ks, maxd, spacings;
  std::vector<std::pair<int, double>> max_by_k;
  for (int k : cfg.tile_counts) {
    const TiledRing tiled = tile_ring(1.0, TilingSpec{k, cfg.eps_t, cfg.axial_eps, 0.0});
    AttractorRegistry reg;
    for (const auto& fp : find_fixed_points(tiled.field, box, tiled.sinks))
      if (fp.kind == FixedPointKind::Stable) reg.add(fp);
    reg.finalize(box);
    if (reg.size() != static_cast<std::size_t>(k)) {
      check(out, false, "tiling-sink-count",
            "k=" + std::to_string(k) + " found " + std::to_string(reg.size()));
      continue;
    }
    const TilingReport rep = measure_dtype_error(ring, tiled.field, reg, tiled.spacing, box,
                                                 samples, icfg, 2.0 * cfg.t_max, cfg.jobs);
    csv.add_row({static_cast<double>(k), rep.spacing, rep.max_displacement,
                 rep.p99_displacement, rep.fraction_exceeding_spacing,
                 static_cast<long long>(rep.n_unresolved)});
    check(out, rep.fraction_exceeding_spacing <= 0.01,
          "tiling-resolution", "k=" + std::to_string(k) + " fraction=" +
              format_shortest(rep.fraction_exceeding_spacing));
    ks.push_back(static_cast<double>(k));
    maxd.push_back(rep.max_displacement);
    spacings.push_back(rep.spacing);
    max_by_k.emplace_back(k, rep.max_displacement);
  }

  for (std::size_t i = 0; i + 1 < max_by_k.size(); ++i) {
    if (max_by_k[i + 1].first == 2 * max_by_k[i].first) {
      const double ratio = max_by_k[i + 1].second / max_by_k[i].second;
      check(out, std::abs(ratio - 0.5) <= 0.2 * 0.5, "tiling-halving",
            "k " + std::to_string(max_by_k[i].first) + "->" +
                std::to_string(max_by_k[i + 1].first) + " ratio " + format_shortest(ratio));
      out.summary["halving"].push_back(
          {{"k_from", max_by_k[i].first}, {"k_to", max_by_k[i + 1].first}, {"ratio", ratio}});
    }
  }

  // Isochronous cylinder: tile, detune, retune to the common period.
  const IntegratorConfig ocfg = IntegratorConfig::oracle();
  const TiledCylinder cyl = tile_iso_cylinder(
      1.0, 1.0, -0.5, 0.5, TilingSpec{cfg.cylinder_tiles, cfg.eps_t, cfg.axial_eps, cfg.detune},
      ocfg);
  nlohmann::json cylj;
  cylj["z_levels"] = cyl.z_levels;
  cylj["common_period"] = cyl.common_period;
  cylj["alpha"] = cyl.correction.alpha;
  cylj["isochrony_spread"] = cyl.isochrony_spread;
  std::vector<double> periods;
  for (const auto& c : cyl.cycles) periods.push_back(c.period);
  cylj["periods"] = periods;
  for (std::size_t i = 0; i < periods.size(); ++i)
    for (std::size_t j = i + 1; j < periods.size(); ++j)
      check(out, std::abs(periods[i] - periods[j]) / cyl.common_period < 2e-6,
            "cylinder-periods",
            format_shortest(std::abs(periods[i] - periods[j]) / cyl.common_period));
  double worst_drift = 0.0;
  for (std::size_t i = 0; i + 1 < cyl.cycles.size(); ++i) {
    const PhaseDriftResult d =
        phase_drift(cyl.field, cyl.cycles[i], cyl.cycles[i].anchor, cyl.field, cyl.cycles[i + 1],
                    cyl.cycles[i + 1].anchor, 40, ocfg);
    worst_drift = std::max(worst_drift, std::abs(d.slope_per_rev));
  }
  cylj["max_intertile_drift_per_rev"] = worst_drift;
  check(out, worst_drift < 1e-6, "cylinder-drift", format_shortest(worst_drift));

  fs::create_directories(cfg.out_dir);
  csv.write(opath(cfg, "ring_tiling.csv"));
  record_output(out, opath(cfg, "ring_tiling.csv"));
  write_svg_lines(opath(cfg, "ring_tiling.svg"), "D-type displacement vs tile count", "k",
                  "displacement",
                  {{"max displacement", "#1f77b4", ks, maxd},
                   {"spacing", "#d62728", ks, spacings}});
  record_output(out, opath(cfg, "ring_tiling.svg"));
  {
    std::ofstream js(opath(cfg, "cylinder.json"), std::ios::binary);
    js << cylj.dump(2) << "\n";
  }
  record_output(out, opath(cfg, "cylinder.json"));

  out.summary["cylinder"] = cylj;
  return out;
}

ExperimentOutcome run_lp_bound(const ExperimentConfig& cfg) {
  ExperimentOutcome out;
  if (cfg.nu_list.empty()) throw ConfigError("lp-bound requires at least one nu");
  const double nu = cfg.nu_list.front();
  const VectorField base = make_field(cfg.field_id, cfg.field_params);
  const Domain domain = default_domain(cfg.field_id);
  const VectorField pert = make_perturbed(base, make_g(cfg.g_id), nu);
  const IntegratorConfig icfg = IntegratorConfig::sweep();

  const AttractorRegistry reg_a = stable_registry(base, domain);
  const AttractorRegistry reg_b = stable_registry(pert, domain);
  const auto matching = match_registries(reg_a, reg_b);
  const HorizonPolicy policy = HorizonPolicy::converge(reg_a, reg_b, cfg.t_max);
  const ComparisonRun run = run_comparison(base, pert, domain, cfg.n_samples, cfg.seed, policy,
                                           icfg, cfg.ps, cfg.jobs);

  const ClosenessReport cert = eps_volume_from_run(run, cfg.eps);
  const bool certified = is_eps_delta_close(cert, cfg.delta);
  check(out, certified, "eps-delta-certified",
        "exceedance CI [" + format_shortest(cert.ci_low) + "," + format_shortest(cert.ci_high) +
            "] vs delta " + format_shortest(cfg.delta));

  nlohmann::json summary;
  summary["nu"] = nu;
  summary["eps"] = cfg.eps;
  summary["delta"] = cfg.delta;
  summary["exceedance"] = cert.estimate;
  summary["ci_low"] = cert.ci_low;
  summary["ci_high"] = cert.ci_high;
  summary["horizon_policy"] = run.horizon_record;
  summary["ky_fan"] = [&] {
    std::vector<double> grid;
    for (int i = 1; i <= 256; ++i) grid.push_back(domain.diameter() * i / 256.0);
    return ky_fan_distance(cert.sup_distances, grid);
  }();

  const auto taxonomy = classify_errors(base, pert, cfg.eps, run, reg_a, reg_b, matching, icfg);

  CsvWriter csv("per-sample flow comparison (lp columns ordered as [metric].p)",
                {"index", "x0", "sup_dist", "label", "horizon", "lp_p1", "lp_p2"});
  for (std::size_t i = 0; i < run.results.size(); ++i) {
    const auto& r = run.results[i];
    const double lp1 = r.lp.size() > 0 ? r.lp[0] : 0.0;
    const double lp2 = r.lp.size() > 1 ? r.lp[1] : 0.0;
    csv.add_row({static_cast<double>(i), run.samples[i][0], r.sup,
                 std::string(to_string(taxonomy[i].label)), r.horizon, lp1, lp2});
  }

  if (certified) {
    for (std::size_t pj = 0; pj < cfg.ps.size(); ++pj) {
      const LpReport lp = lp_from_run(run, cfg.ps[pj]);
      const LpBoundCheck chk = check_lp_bound(lp, cert, cfg.eps, cfg.delta, domain.diameter());
      check(out, chk.holds, "lp-bound-p" + format_shortest(cfg.ps[pj]),
            "avg " + format_shortest(lp.average) + " vs bound " + format_shortest(chk.bound));
      summary["lp"].push_back({{"p", cfg.ps[pj]},
                               {"average", lp.average},
                               {"average_2x", lp.average_2x},
                               {"bound", chk.bound},
                               {"margin", chk.margin},
                               {"horizon_suspect", lp.horizon_suspect}});
    }
  }

  fs::create_directories(cfg.out_dir);
  csv.write(opath(cfg, "samples.csv"));
  record_output(out, opath(cfg, "samples.csv"));
  {
    std::ofstream js(opath(cfg, "lp_bound.json"), std::ios::binary);
    js << summary.dump(2) << "\n";
  }
  record_output(out, opath(cfg, "lp_bound.json"));
  out.summary["lp_bound"] = summary;
  return out;
}

ExperimentOutcome run_fit_and_verify(const ExperimentConfig& cfg) {
  ExperimentOutcome out;
  const VectorField target = make_field(cfg.field_id, cfg.field_params);
  const Domain domain = default_domain(cfg.field_id);
  const IntegratorConfig icfg = IntegratorConfig::sweep();
  const AttractorRegistry reg_target = stable_registry(target, domain);
  const int n_target = static_cast<int>(reg_target.size());
  double lambda = std::numeric_limits<double>::infinity();
  for (const auto& a : reg_target.attractors()) lambda = std::min(lambda, a.rate);

  CsvWriter csv("RBF fit-then-certify pipeline per center count",
                {"centers", "c0", "c1", "delta_hat", "ci_high", "eps_hat", "n_mismatch",
                 "topology_changed"});
  std::vector<double> khat_x, khat_y;
  nlohmann::json rows = nlohmann::json::array();
  int coarsest_ok_mismatch = -1;
  int finest_mismatch = -1;

  for (std::size_t i = 0; i < cfg.rbf_centers.size(); ++i) {
    const int centers = cfg.rbf_centers[i];
    RbfFitOptions fopts;
    fopts.n_centers = centers;
    fopts.sigma = cfg.rbf_sigma;
    fopts.ridge = cfg.rbf_ridge;
    fopts.n_samples = std::max(400, 8 * centers);
    fopts.seed = cfg.seed;
    const RbfApproximant rbf = fit_rbf(target, domain, fopts);
    const VectorField approx_field = rbf.field();
    const double c0 = rbf.report().distance_to_target.c0;
    const double c1 = rbf.report().distance_to_target.c1;

    if (count_stable(approx_field, domain) != n_target) {
      csv.add_row({static_cast<double>(centers), c0, c1, 0.0, 0.0, 0.0, 0ll, 1ll});
      rows.push_back({{"centers", centers}, {"c0", c0}, {"c1", c1}, {"topology_changed", true}});
      continue;
    }
    const AttractorRegistry reg_fit = stable_registry(approx_field, domain);
    const auto matching = match_registries(reg_target, reg_fit);
    const HorizonPolicy policy = HorizonPolicy::converge(reg_target, reg_fit, cfg.t_max);
    const ComparisonRun run = run_comparison(target, approx_field, domain, cfg.n_samples,
                                             row_seed(cfg.seed, i), policy, icfg, {}, cfg.jobs);
    int n_mismatch = 0;
    double eps_hat = 0.0;
    for (const auto& r : run.results) {
      if (sample_mismatched(r, matching))
        ++n_mismatch;
      else
        eps_hat = std::max(eps_hat, r.sup);
    }
    const double delta_hat = static_cast<double>(n_mismatch) / run.results.size();
    const double ci_high = wilson_95(n_mismatch, static_cast<int>(run.results.size())).hi;
    csv.add_row({static_cast<double>(centers), c0, c1, delta_hat, ci_high, eps_hat,
                 static_cast<long long>(n_mismatch), 0ll});
    rows.push_back({{"centers", centers},
                    {"c0", c0},
                    {"c1", c1},
                    {"delta_hat", delta_hat},
                    {"ci_high", ci_high},
                    {"eps_hat", eps_hat},
                    {"n_mismatch", n_mismatch}});
    khat_x.push_back(c1 / lambda);
    khat_y.push_back(eps_hat);
    if (coarsest_ok_mismatch < 0) coarsest_ok_mismatch = n_mismatch;
    finest_mismatch = n_mismatch;
  }

  check(out, finest_mismatch == 0, "fit-finest-delta-zero",
        "mismatches " + std::to_string(finest_mismatch));
  check(out, coarsest_ok_mismatch > 0, "fit-coarse-delta-positive",
        "coarsest valid fit mismatches " + std::to_string(coarsest_ok_mismatch));

  if (khat_x.size() >= 2) {
    const OriginFit khat = ols_through_origin(khat_x, khat_y);
    out.summary["k_hat"] = khat.slope;
    out.summary["k_hat_r2"] = khat.r2;
  }
  out.summary["rows"] = rows;
  out.summary["lambda"] = lambda;

  fs::create_directories(cfg.out_dir);
  csv.write(opath(cfg, "fits.csv"));
  record_output(out, opath(cfg, "fits.csv"));
  {
    std::ofstream js(opath(cfg, "fit_summary.json"), std::ios::binary);
    js << out.summary.dump(2) << "\n";
  }
  record_output(out, opath(cfg, "fit_summary.json"));
  return out;
}

ExperimentOutcome run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  std::filesystem::create_directories(cfg.out_dir);

  StageTimer total;
  ExperimentOutcome out;
  if (cfg.experiment == "bistable-sweep") out = run_bistable_sweep(cfg);
  else if (cfg.experiment == "drift-demo") out = run_drift_demo(cfg);
  else if (cfg.experiment == "correction-demo") out = run_correction_demo(cfg);
  else if (cfg.experiment == "tiling-study") out = run_tiling_study(cfg);
  else if (cfg.experiment == "lp-bound") out = run_lp_bound(cfg);
  else if (cfg.experiment == "fit-and-verify") out = run_fit_and_verify(cfg);
  else throw ConfigError("unknown experiment '" + cfg.experiment + "'");

  // Config snapshot, summary, machine-readable failures, then the manifest.
  const std::string cfg_path = (std::filesystem::path(cfg.out_dir) / "config_used.toml").string();
  cfg.save(cfg_path);
  out.summary["outputs"].push_back(cfg_path);

  const std::string summary_path = (std::filesystem::path(cfg.out_dir) / "summary.json").string();
  {
    std::ofstream js(summary_path, std::ios::binary);
    js << out.summary.dump(2) << "\n";
  }

  if (!out.failures.empty()) {
    nlohmann::json fj;
    fj["experiment"] = cfg.experiment;
    fj["violated"] = out.failures;
    const std::string fpath = (std::filesystem::path(cfg.out_dir) / "failures.json").string();
    std::ofstream js(fpath, std::ios::binary);
    js << fj.dump(2) << "\n";
  }

  RunManifest manifest(kToolVersion, cfg.to_toml());
  manifest.add_stage("total", total.elapsed_ms());
  if (out.summary.contains("outputs"))
    for (const auto& p : out.summary["outputs"]) manifest.add_output(p.get<std::string>());
  manifest.set_outcome(out.exit_code, out.failures);
  manifest.save((std::filesystem::path(cfg.out_dir) / "manifest.json").string());
  return out;
}

}  // namespace approx::cli
