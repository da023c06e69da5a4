#include "doctest.h"

#include <cmath>

#include "approx/adjoint.hpp"
#include "approx/cycles.hpp"
#include "approx/fields.hpp"
#include "approx/fixed_points.hpp"
#include "support/oracles.hpp"

using namespace approx;
using namespace approx::testing;

namespace {

IntegratorConfig tight_cfg() {
  IntegratorConfig cfg;
  cfg.rtol = 1e-12;
  cfg.atol = 1e-14;
  return cfg;
}

}  // namespace

TEST_CASE("fixed points of the double well") {
  const VectorField f = double_well_field();
  const Domain box = double_well_domain();
  const auto roots = find_fixed_points(f, box, 9);

  REQUIRE(roots.size() == 3);
  CHECK(roots[0].location[0] == doctest::Approx(-1.0).epsilon(1e-8));
  CHECK(roots[1].location[0] == doctest::Approx(0.0).epsilon(1e-8));
  CHECK(roots[2].location[0] == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(roots[0].eigenvalues[0].real() == doctest::Approx(-2.0).epsilon(1e-8));
  CHECK(roots[1].eigenvalues[0].real() == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(roots[2].eigenvalues[0].real() == doctest::Approx(-2.0).epsilon(1e-8));
  CHECK(roots[0].kind == FixedPointKind::Stable);
  CHECK(roots[1].kind == FixedPointKind::Unstable);
  CHECK(roots[2].kind == FixedPointKind::Stable);
  for (const auto& r : roots) CHECK(r.residual < 1e-10);

  CHECK(spectral_gap(roots[0]) == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(spectral_gap(roots[2]) == doctest::Approx(2.0).epsilon(1e-8));
  CHECK_THROWS_AS(spectral_gap(roots[1]), std::invalid_argument);
}

TEST_CASE("degenerate root sets") {
  SUBCASE("zero field: every seed is a non-hyperbolic root") {
    const VectorField zero(1, [](const Vec& x) { return Vec(Vec::Zero(x.size())); },
                           [](const Vec&) { return Mat(Mat::Zero(1, 1)); });
    const Domain box(make_vec({-1.0}), make_vec({1.0}));
    const auto roots = find_fixed_points(zero, box, 5);
    CHECK(roots.size() == 5);
    for (const auto& r : roots) CHECK(r.kind == FixedPointKind::NonHyperbolic);
  }

  SUBCASE("ring attractor: circle points flagged non-hyperbolic") {
    const VectorField ring = ring_attractor_field(1.0);
    const Domain box(make_vec({-1.6, -1.6}), make_vec({1.6, 1.6}));
    const auto roots = find_fixed_points(ring, box, 8);
    bool found_circle_point = false;
    for (const auto& r : roots) {
      const double rad = r.location.norm();
      if (std::abs(rad - 1.0) < 1e-6) {
        found_circle_point = true;
        CHECK(r.kind == FixedPointKind::NonHyperbolic);
      }
    }
    CHECK(found_circle_point);
  }

  SUBCASE("linear diagonal field spectral gap") {
    const VectorField lin(2, [](const Vec& x) { return make_vec({-x[0], -3.0 * x[1]}); },
                          [](const Vec&) {
                            Mat j = Mat::Zero(2, 2);
                            j(0, 0) = -1.0;
                            j(1, 1) = -3.0;
                            return j;
                          });
    const auto roots = find_fixed_points(lin, Domain(make_vec({-1.0, -1.0}), make_vec({1.0, 1.0})), 4);
    REQUIRE(roots.size() == 1);
    CHECK(spectral_gap(roots[0]) == doctest::Approx(1.0));
  }
}

TEST_CASE("poincare return map") {
  const IntegratorConfig cfg = IntegratorConfig::oracle();
  const VectorField f = radial_cycle_field(1.0, 1.0, 0.0);
  const PoincareSection section(make_vec({1.0, 0.0}), make_vec({0.0, 1.0}));

  SUBCASE("on-cycle point returns to itself after one period") {
    const auto r = poincare_return(f, section, make_vec({1.0, 0.0}), cfg);
    CHECK(r.time == doctest::Approx(2.0 * M_PI).epsilon(1e-8));
    CHECK((r.point - make_vec({1.0, 0.0})).norm() < 1e-8);
  }

  SUBCASE("off-cycle point contracts toward r = 1") {
    const auto r = poincare_return(f, section, make_vec({1.5, 0.0}), cfg);
    CHECK(std::abs(r.point[0] - 1.0) < 0.5 - 1e-3);
  }

  SUBCASE("sheared return time against a tighter-tolerance oracle") {
    const VectorField sheared = radial_cycle_field(1.0, 1.0, 0.3);
    const auto r = poincare_return(sheared, section, make_vec({1.2, 0.0}), cfg);
    const auto r_oracle = poincare_return(sheared, section, make_vec({1.2, 0.0}), tight_cfg());
    CHECK(std::abs(r.time - r_oracle.time) < 1e-7);
  }

  SUBCASE("no return raises") {
    // Transverse at the start, but drifts away and never comes back.
    const VectorField drift(2, [](const Vec&) { return make_vec({0.3, 1.0}); });
    CHECK_THROWS_AS(poincare_return(drift, section, make_vec({1.0, 0.0}), cfg, 30.0),
                    NonReturningError);
  }

  SUBCASE("tangential start is rejected") {
    const VectorField radialized(2, [](const Vec& x) { return Vec(-1.0 * x); });
    CHECK_THROWS_AS(poincare_return(radialized, section, make_vec({1.0, 0.0}), cfg, 30.0),
                    std::invalid_argument);
  }
}

TEST_CASE("limit cycle location and Floquet structure") {
  const IntegratorConfig cfg = tight_cfg();

  SUBCASE("radial cycle from an off-cycle seed") {
    const VectorField f = radial_cycle_field(1.0, 1.0, 0.0);
    const LimitCycle c = find_limit_cycle(f, make_vec({1.3, 0.0}), cfg);
    CHECK(c.period == doctest::Approx(2.0 * M_PI).epsilon(1e-8));
    CHECK(std::abs(c.anchor.norm() - 1.0) < 1e-8);
    CHECK(c.closure_error < 1e-8);
    CHECK(c.hyperbolic);
    CHECK(c.points.size() >= 256);

    // Exactly one trivial multiplier, the other matches e^{-2*kappa*T}.
    const int trivial = c.trivial_multiplier_index();
    CHECK(std::abs(c.multipliers[static_cast<std::size_t>(trivial)] -
                   std::complex<double>(1.0, 0.0)) < 1e-6);
    const double mu2 = std::abs(c.multipliers[static_cast<std::size_t>(1 - trivial)]);
    CHECK(std::abs(mu2 - std::exp(-4.0 * M_PI)) / std::exp(-4.0 * M_PI) < 1e-6);
  }

  SUBCASE("scaling the field rescales the period, not the multipliers") {
    const VectorField f = scale_field(radial_cycle_field(1.0, 1.0, 0.0), 2.0);
    const LimitCycle c = find_limit_cycle(f, make_vec({1.3, 0.0}), cfg);
    CHECK(c.period == doctest::Approx(M_PI).epsilon(1e-8));
    const int trivial = c.trivial_multiplier_index();
    const double mu2 = std::abs(c.multipliers[static_cast<std::size_t>(1 - trivial)]);
    // Contraction rate doubles while the period halves: same multiplier.
    CHECK(std::abs(mu2 - std::exp(-4.0 * M_PI)) / std::exp(-4.0 * M_PI) < 1e-5);
  }

  SUBCASE("period scaling property across factors") {
    for (double c_scale : {0.5, 2.0, M_PI}) {
      const VectorField f = scale_field(radial_cycle_field(1.0, 1.0, 0.0), c_scale);
      const LimitCycle c = find_limit_cycle(f, make_vec({1.2, 0.1}), IntegratorConfig::oracle());
      CHECK(std::abs(c.period - 2.0 * M_PI / c_scale) / (2.0 * M_PI / c_scale) < 1e-8);
    }
  }

  SUBCASE("newton failure on a cycle-free field") {
    const VectorField spiral(2,
                             [](const Vec& x) {
                               return make_vec({-0.2 * x[0] - x[1], x[0] - 0.2 * x[1]});
                             });
    CHECK_THROWS(find_limit_cycle(spiral, make_vec({1.0, 0.0}), IntegratorConfig::oracle()));
  }
}

TEST_CASE("adjoint solution") {
  const IntegratorConfig cfg = tight_cfg();
  const VectorField f = radial_cycle_field(1.0, 1.0, 0.0);
  const LimitCycle cycle = find_limit_cycle(f, make_vec({1.0, 0.0}), cfg);
  const AdjointSolution adj = adjoint_solution(f, cycle, cfg);

  SUBCASE("certificates") {
    CHECK(adj.normalization_residual < 1e-6);
    CHECK(adj.periodicity_residual < 1e-6);
  }

  SUBCASE("closed form Z = (-sin, cos)/omega on the unit cycle") {
    for (std::size_t i = 0; i < adj.times.size(); i += 37) {
      const Vec& p = cycle.points[i];
      const double theta = std::atan2(p[1], p[0]);
      const Vec z_exact = make_vec({-std::sin(theta), std::cos(theta)});
      CHECK((adj.z[i] - z_exact).norm() < 1e-6);
    }
  }

  SUBCASE("degenerate adjoint rejected on a non-hyperbolic cycle") {
    // The ring attractor's unit circle has two unit multipliers.
    const VectorField ring = ring_attractor_field(1.0);
    LimitCycle fake = cycle;
    const MonodromyResult mono = monodromy(ring, make_vec({1.0, 0.0}), 2.0 * M_PI, cfg);
    fake.monodromy = mono.matrix;
    fake.multipliers = mono.multipliers;
    CHECK_THROWS_AS(adjoint_solution(ring, fake, cfg), DegenerateAdjointError);
  }
}

TEST_CASE("period sensitivity (adjoint pairing)") {
  const IntegratorConfig cfg = tight_cfg();
  const VectorField f = radial_cycle_field(1.0, 1.0, 0.0);
  const LimitCycle cycle = find_limit_cycle(f, make_vec({1.0, 0.0}), cfg);
  const AdjointSolution adj = adjoint_solution(f, cycle, cfg);

  SUBCASE("pairing with the field itself gives -T") {
    const auto s = period_sensitivity(cycle, adj, f);
    CHECK(s.value == doctest::Approx(-cycle.period).epsilon(1e-9));
  }

  SUBCASE("zero direction gives zero") {
    const VectorField zero(2, [](const Vec& x) { return Vec(Vec::Zero(x.size())); });
    CHECK(period_sensitivity(cycle, adj, zero).value == 0.0);
  }

  SUBCASE("matches centered finite differences for smooth directions") {
    // Six smooth directions with non-negligible period response (loop
    // integrals of gradient-like directions vanish and carry no signal).
    const std::vector<VectorField> directions = {
        VectorField(2, [](const Vec& x) { return make_vec({x[1], -x[0]}); }),
        VectorField(2, [](const Vec& x) { return make_vec({x[0] * x[1], x[0] - x[1]}); }),
        VectorField(2, [](const Vec& x) { return make_vec({std::cos(2 * x[1]), 0.3 * x[0]}); }),
        VectorField(2, [](const Vec& x) {
          const double c = 1.0 + 0.3 * x[0];
          return make_vec({-c * x[1], c * x[0]});
        }),
        VectorField(2, [](const Vec& x) {
          const double c = 1.0 + 0.5 * x[1];
          return make_vec({-c * x[1], c * x[0]});
        }),
        VectorField(2, [](const Vec& x) {
          return make_vec({x[0] * x[0] - x[1], x[0] + x[0] * x[1]});
        }),
    };
    for (const auto& g : directions) {
      const auto s = period_sensitivity(cycle, adj, g);
      const double h = 1e-4;
      const LimitCycle plus =
          find_limit_cycle(make_perturbed(f, g, h), cycle.section, cycle.anchor, cfg);
      // make_perturbed requires nu >= 0; build the minus side explicitly.
      const VectorField minus_field(
          2, [&f, &g, h](const Vec& x) { return Vec(f(x) - h * g(x)); });
      const LimitCycle minus = find_limit_cycle(minus_field, cycle.section, cycle.anchor, cfg);
      const double fd = (plus.period - minus.period) / (2.0 * h);
      REQUIRE(std::abs(fd) > 0.5);
      CHECK(std::abs(s.value - fd) / std::abs(fd) < 1e-4);
    }
  }
}
