#include "doctest.h"

#include <cmath>

#include "approx/distance.hpp"
#include "approx/fields.hpp"
#include "support/oracles.hpp"

using namespace approx;
using namespace approx::testing;

TEST_CASE("sup trajectory distance") {
  const VectorField f = double_well_field();
  const Domain box = double_well_domain();
  const IntegratorConfig cfg = IntegratorConfig::oracle();

  SUBCASE("identical fields give exactly zero") {
    const auto r = sup_trajectory_distance(f, f, make_vec({1.3}), 20.0, box, cfg);
    CHECK(r.sup == 0.0);
    CHECK_FALSE(r.escaped);
  }

  SUBCASE("small perturbation stays within the contraction bound shape") {
    const double nu = 0.05;
    const VectorField fp = make_perturbed(f, neg_cos_2x_field(), nu);
    const auto r = sup_trajectory_distance(f, fp, make_vec({1.5}), 30.0, box, cfg);
    // K*nu/lambda with a measured K; K stays O(1) away from the separatrix.
    const double k_measured = r.sup * 2.0 / nu;
    CHECK(k_measured > 0.0);
    CHECK(k_measured < 10.0);

    // Brute-force oracle: 10x denser fixed grid on the same horizon.
    const Trajectory ta = integrate(f, make_vec({1.5}), 0.0, 30.0, cfg);
    const Trajectory tb = integrate(fp, make_vec({1.5}), 0.0, 30.0, cfg);
    double brute = 0.0;
    const int m = 10 * r.grid_points;
    for (int k = 0; k <= m; ++k) {
      const double t = 30.0 * k / m;
      brute = std::max(brute, (ta.at(t) - tb.at(t)).norm());
    }
    CHECK(r.sup == doctest::Approx(brute).epsilon(0.01));
  }

  SUBCASE("basin flip saturates at the attractor separation") {
    const VectorField fp = make_perturbed(f, neg_cos_2x_field(), 0.15);
    // x0 = 0.05 lies between the two separatrices (0 and ~0.1467).
    const auto r = sup_trajectory_distance(f, fp, make_vec({0.05}), 80.0, box, cfg);
    CHECK(r.sup == doctest::Approx(2.0).epsilon(0.05));
  }

  SUBCASE("escape reports the domain diameter") {
    const VectorField outward(1, [](const Vec& x) { return Vec(1.0 * x); });
    const Domain small(make_vec({-1.0}), make_vec({1.0}));
    const auto r = sup_trajectory_distance(outward, f, make_vec({0.5}), 20.0, small, cfg);
    CHECK(r.escaped);
    CHECK(r.sup == small.diameter());
  }
}

TEST_CASE("c1 distance estimate") {
  const VectorField f = double_well_field();
  const Domain box = double_well_domain();

  SUBCASE("identical fields") {
    const auto d = c1_distance_estimate(f, f, box, 256);
    CHECK(d.c0 == 0.0);
    CHECK(d.c1 == 0.0);
  }

  SUBCASE("constant offset has zero derivative distance") {
    const VectorField g(1, [&f](const Vec& x) { return Vec(f(x) + make_vec({0.37})); },
                        [&f](const Vec& x) { return f.jacobian(x); });
    const auto d = c1_distance_estimate(f, g, box, 256);
    CHECK(d.c0 == doctest::Approx(0.37).epsilon(1e-12));
    CHECK(d.c1 == 0.0);
  }

  SUBCASE("analytic sup for the cosine perturbation") {
    const VectorField fp = make_perturbed(f, neg_cos_2x_field(), 0.15);
    const auto d = c1_distance_estimate(f, fp, box, 4096);
    CHECK(d.c0 == doctest::Approx(0.15).epsilon(0.02));
    CHECK(d.c1 == doctest::Approx(0.30).epsilon(0.02));
  }

  CHECK_THROWS_AS(c1_distance_estimate(f, f, box, 10), std::invalid_argument);
}

TEST_CASE("inward pointing check") {
  const VectorField f = double_well_field();
  const Domain box = double_well_domain();

  SUBCASE("double well points inward with margin 6") {
    const auto r = check_inward_pointing(f, box, 5.9);
    CHECK(r.inward);
    CHECK(r.worst_dot == doctest::Approx(-6.0));
  }

  SUBCASE("outward field fails") {
    const VectorField outward(1, [](const Vec& x) { return Vec(1.0 * x); });
    const auto r = check_inward_pointing(outward, Domain(make_vec({-1.0}), make_vec({1.0})), 0.1);
    CHECK_FALSE(r.inward);
  }

  SUBCASE("perturbations below the margin keep the domain forward-invariant") {
    const VectorField fp = make_perturbed(f, neg_cos_2x_field(), 0.2);
    const auto r = check_inward_pointing(fp, box, 5.0);
    CHECK(r.inward);
  }

  SUBCASE("2D boundary sampling on the ring field") {
    // r' = r(1-r^2) points inward on the box [-1.6,1.6]^2 everywhere on the
    // boundary (|x| >= 1.6 > 1 there, corners up to r ~ 2.26).
    const auto r = check_inward_pointing(ring_attractor_field(1.0),
                                         Domain(make_vec({-1.6, -1.6}), make_vec({1.6, 1.6})),
                                         0.5, 512);
    CHECK(r.inward);
  }
}
