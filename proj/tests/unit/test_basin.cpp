#include "doctest.h"

#include <cmath>

#include "approx/basin.hpp"
#include "approx/fields.hpp"
#include "support/oracles.hpp"

using namespace approx;
using namespace approx::testing;

namespace {

AttractorRegistry double_well_registry(const VectorField& f) {
  AttractorRegistry reg;
  for (const auto& fp : find_fixed_points(f, double_well_domain(), 9))
    if (fp.kind == FixedPointKind::Stable) reg.add(fp);
  reg.finalize(double_well_domain());
  return reg;
}

}  // namespace

TEST_CASE("basin labeling on the double well") {
  const VectorField f = double_well_field();
  const Domain box = double_well_domain();
  const IntegratorConfig cfg = IntegratorConfig::sweep();
  const AttractorRegistry reg = double_well_registry(f);
  REQUIRE(reg.size() == 2);
  // id 0 is the -1 attractor (lexicographic fixed-point order).
  CHECK(reg[0].representative()[0] == doctest::Approx(-1.0));

  SUBCASE("interior points resolve to the right wells") {
    CHECK(label_basin(f, reg, make_vec({0.5}), cfg, 100.0, box).id == 1);
    CHECK(label_basin(f, reg, make_vec({-0.5}), cfg, 100.0, box).id == 0);
    CHECK(label_basin(f, reg, make_vec({1.9}), cfg, 100.0, box).id == 1);
  }

  SUBCASE("the separatrix point is never silently assigned") {
    const LabelResult r = label_basin(f, reg, make_vec({0.0}), cfg, 50.0, box);
    CHECK_FALSE(resolved(r));
    CHECK_FALSE(r.escaped);
  }
}

TEST_CASE("basin mismatch volume") {
  const VectorField f = double_well_field();
  const Domain box = double_well_domain();
  const IntegratorConfig cfg = IntegratorConfig::sweep();
  const AttractorRegistry reg = double_well_registry(f);

  SUBCASE("identical fields have zero mismatch") {
    const auto matching = match_registries(reg, reg);
    const MismatchReport rep =
        basin_mismatch_volume(f, f, reg, reg, matching, box, 400, 7, cfg, 100.0);
    CHECK(rep.delta_hat == 0.0);
    CHECK(rep.n_mismatch == 0);
  }

  SUBCASE("mismatch strip length matches the bisection oracle") {
    const double nu = 0.15;
    const VectorField fp = make_perturbed(f, neg_cos_2x_field(), nu);
    const AttractorRegistry reg_p = double_well_registry(fp);
    const auto matching = match_registries(reg, reg_p);
    const int n = 4000;
    const MismatchReport rep =
        basin_mismatch_volume(f, fp, reg, reg_p, matching, box, n, 11, cfg, 150.0);

    // Oracle: the strip is (0, x_hat) with x_hat the perturbed root near 0.
    const double x_hat = bisect([&](double x) { return fp(make_vec({x}))[0]; }, -0.5, 0.5);
    const double delta_true = std::abs(x_hat) / 4.0;
    CHECK(rep.delta_hat * 4.0 == doctest::Approx(std::abs(x_hat)).epsilon(0.08));
    CHECK(delta_true >= rep.ci_low * 0.9);
    CHECK(delta_true <= rep.ci_high * 1.1);
    // All mismatched points live in the strip (within sampling tolerance).
    for (const Vec& p : rep.mismatched_points) {
      CHECK(p[0] > -1e-9);
      CHECK(p[0] < x_hat + 1e-9);
    }
  }

  SUBCASE("determinism: identical seeds give identical reports") {
    const VectorField fp = make_perturbed(f, neg_cos_2x_field(), 0.1);
    const AttractorRegistry reg_p = double_well_registry(fp);
    const auto matching = match_registries(reg, reg_p);
    const MismatchReport a =
        basin_mismatch_volume(f, fp, reg, reg_p, matching, box, 800, 99, cfg, 150.0);
    const MismatchReport b =
        basin_mismatch_volume(f, fp, reg, reg_p, matching, box, 800, 99, cfg, 150.0, 4);
    CHECK(a.delta_hat == b.delta_hat);
    CHECK(a.mismatched_indices == b.mismatched_indices);
  }

  SUBCASE("conservative counting dominates the unresolved-excluded estimate") {
    const VectorField fp = make_perturbed(f, neg_cos_2x_field(), 0.1);
    const AttractorRegistry reg_p = double_well_registry(fp);
    const auto matching = match_registries(reg, reg_p);
    // Tight t_max leaves slow separatrix-adjacent samples unresolved.
    const MismatchReport rep =
        basin_mismatch_volume(f, fp, reg, reg_p, matching, box, 2000, 3, cfg, 12.0);
    const double excluded = static_cast<double>(rep.n_mismatch - rep.n_unresolved) / rep.n;
    CHECK(rep.delta_hat >= excluded);
  }

  SUBCASE("CI width shrinks like sqrt(2) when n doubles") {
    const VectorField fp = make_perturbed(f, neg_cos_2x_field(), 0.15);
    const AttractorRegistry reg_p = double_well_registry(fp);
    const auto matching = match_registries(reg, reg_p);
    const MismatchReport r1 =
        basin_mismatch_volume(f, fp, reg, reg_p, matching, box, 2000, 5, cfg, 150.0);
    const MismatchReport r2 =
        basin_mismatch_volume(f, fp, reg, reg_p, matching, box, 4000, 5, cfg, 150.0);
    const double w1 = r1.ci_high - r1.ci_low;
    const double w2 = r2.ci_high - r2.ci_low;
    CHECK(w1 / w2 == doctest::Approx(std::sqrt(2.0)).epsilon(0.2));
  }

  SUBCASE("topology change is rejected") {
    // Constant perturbation past the saddle-node at 2/(3*sqrt(3)).
    const VectorField minus_one(1, [](const Vec&) { return make_vec({-1.0}); });
    const VectorField fp = make_perturbed(f, minus_one, 0.5);
    const auto roots = find_fixed_points(fp, box, 16);
    int stable = 0;
    for (const auto& r : roots)
      if (r.kind == FixedPointKind::Stable) ++stable;
    REQUIRE(stable == 1);
    AttractorRegistry reg_p;
    for (const auto& r : roots)
      if (r.kind == FixedPointKind::Stable) reg_p.add(r);
    reg_p.finalize(box);
    CHECK_THROWS_AS(match_registries(reg, reg_p), TopologyChangedError);
  }
}

TEST_CASE("separatrix bisection") {
  const VectorField f = double_well_field();
  const Domain box = double_well_domain();
  const IntegratorConfig cfg = IntegratorConfig::sweep();
  const AttractorRegistry reg = double_well_registry(f);

  SUBCASE("unperturbed separatrix sits at the origin") {
    const double s = locate_separatrix_1d(f, reg, -0.5, 0.5, 1e-8, cfg, 200.0, box);
    CHECK(std::abs(s) < 1e-8);
  }

  SUBCASE("perturbed separatrix matches the root of the perturbed field") {
    const VectorField fp = make_perturbed(f, neg_cos_2x_field(), 0.15);
    const AttractorRegistry reg_p = double_well_registry(fp);
    const double s = locate_separatrix_1d(fp, reg_p, -0.5, 0.5, 1e-7, cfg, 250.0, box);
    const double root = bisect([&](double x) { return fp(make_vec({x}))[0]; }, -0.5, 0.5);
    CHECK(s == doctest::Approx(root).epsilon(1e-6));
  }

  SUBCASE("same-label bracket is rejected") {
    CHECK_THROWS_AS(locate_separatrix_1d(f, reg, 0.2, 0.8, 1e-6, cfg, 100.0, box),
                    std::invalid_argument);
  }
}

TEST_CASE("basin scaling sweep") {
  const VectorField f = double_well_field();
  const Domain box = double_well_domain();
  const IntegratorConfig cfg = IntegratorConfig::sweep();

  const std::vector<double> nus = {0.02, 0.04, 0.06, 0.08, 0.10};
  const ScalingFit fit =
      basin_scaling_experiment(f, neg_cos_2x_field(), nus, box, 2500, 21, cfg, 150.0);
  REQUIRE(fit.rows.size() == nus.size());
  for (const auto& row : fit.rows) CHECK_FALSE(row.topology_changed);
  CHECK(fit.r2 >= 0.99);
  // Implicit-function oracle: the strip is ~nu wide in a domain of length 4.
  CHECK(fit.slope == doctest::Approx(0.25).epsilon(0.15));

  SUBCASE("rows breaking the topology are flagged and excluded") {
    const VectorField minus_one(1, [](const Vec&) { return make_vec({-1.0}); });
    const ScalingFit fit2 =
        basin_scaling_experiment(f, minus_one, {0.05, 0.5}, box, 500, 22, cfg, 150.0);
    REQUIRE(fit2.rows.size() == 2);
    CHECK_FALSE(fit2.rows[0].topology_changed);
    CHECK(fit2.rows[1].topology_changed);
  }
}
