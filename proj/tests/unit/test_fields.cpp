#include "doctest.h"

#include <cmath>

#include "approx/bump.hpp"
#include "approx/cycles.hpp"
#include "approx/fields.hpp"
#include "approx/rbf.hpp"
#include "approx/sampling.hpp"
#include "support/oracles.hpp"

using namespace approx;
using namespace approx::testing;

namespace {

// Analytic-vs-central-difference Jacobian agreement on random probes.
void check_jacobian(const VectorField& f, const Domain& box, std::uint64_t seed, double tol = 1e-5) {
  SampleRng rng(seed, 0);
  for (int k = 0; k < 20; ++k) {
    Vec x(box.dimension());
    for (int d = 0; d < box.dimension(); ++d) x[d] = rng.next_in(box.lo[d], box.hi[d]);
    const Mat ja = f.jacobian(x);
    const Mat jf = f.fd_jacobian(x);
    const double scale = std::max(1.0, operator_norm(ja));
    CHECK(operator_norm(Mat(ja - jf)) / scale < tol);
  }
}

}  // namespace

TEST_CASE("double-well field basics") {
  const VectorField f = double_well_field();
  CHECK(f(make_vec({0.5}))[0] == doctest::Approx(0.375));
  CHECK(f(make_vec({1.0}))[0] == 0.0);
  CHECK(f.jacobian(make_vec({1.0}))(0, 0) == doctest::Approx(-2.0));
  CHECK(f.jacobian(make_vec({2.0}))(0, 0) == doctest::Approx(-11.0));
  check_jacobian(f, double_well_domain(), 1);
}

TEST_CASE("perturbation family") {
  const VectorField base = double_well_field();
  const VectorField g = neg_cos_2x_field();

  SUBCASE("nu = 0 reproduces the base exactly") {
    const VectorField f0 = make_perturbed(base, g, 0.0);
    SampleRng rng(4, 0);
    for (int k = 0; k < 50; ++k) {
      const Vec x = make_vec({rng.next_in(-2.0, 2.0)});
      CHECK(f0(x)[0] == base(x)[0]);
    }
  }

  SUBCASE("value arithmetic at the origin") {
    const VectorField f = make_perturbed(base, g, 0.15);
    CHECK(f(make_vec({0.0}))[0] == doctest::Approx(-0.15));
  }

  SUBCASE("perturbed separatrix root scales like nu") {
    const VectorField f = make_perturbed(base, g, 0.15);
    const double root = bisect([&](double x) { return f(make_vec({x}))[0]; }, -0.5, 0.5);
    CHECK(std::abs(root) <= 1.1 * 0.15);
    CHECK(root == doctest::Approx(0.146746).epsilon(1e-4));
  }

  SUBCASE("norm bookkeeping for the canonical direction") {
    const auto fam = PerturbationFamily::make(base, g, 0.1, double_well_domain(), 1024);
    CHECK(fam.g_c0_norm == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(fam.g_c1_norm == doctest::Approx(3.0).epsilon(1e-2));
  }

  SUBCASE("jacobians stay analytic through the combinator") {
    check_jacobian(make_perturbed(base, g, 0.15), double_well_domain(), 2);
  }
}

TEST_CASE("scale_field") {
  const VectorField f = double_well_field();

  SUBCASE("c = 1 is the identity") {
    const VectorField s = scale_field(f, 1.0);
    CHECK(s(make_vec({0.7}))[0] == f(make_vec({0.7}))[0]);
  }

  SUBCASE("zero set is preserved") {
    const VectorField s = scale_field(f, 2.7);
    for (double r : {-1.0, 0.0, 1.0}) CHECK(s(make_vec({r}))[0] == 0.0);
  }

  SUBCASE("cycle period divides by c") {
    const VectorField cyc = radial_cycle_field(1.0, 1.0, 0.0);
    const VectorField fast = scale_field(cyc, 2.0);
    const LimitCycle c = find_limit_cycle(fast, make_vec({1.3, 0.0}), IntegratorConfig::oracle());
    CHECK(c.period == doctest::Approx(M_PI).epsilon(1e-6));
  }

  CHECK_THROWS_AS(scale_field(f, -1.0), std::invalid_argument);
}

TEST_CASE("radial cycle field geometry") {
  const VectorField f = radial_cycle_field(1.0, 1.0, 0.3);
  // On the unit circle the radial part vanishes and theta' = omega.
  const Vec p = make_vec({std::cos(0.8), std::sin(0.8)});
  const Vec v = f(p);
  CHECK(v.dot(p) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(v.norm() == doctest::Approx(1.0));
  check_jacobian(f, Domain(make_vec({0.3, 0.3}), make_vec({1.6, 1.6})), 3);
}

TEST_CASE("multi-cycle field") {
  const MultiCycleSpec spec = multi_cycle_2_spec();
  const VectorField f = multi_cycle_field(spec);
  CHECK(multi_cycle_separation(spec) == doctest::Approx(3.0));

  // Inside a disc plateau the field is the translated radial cycle.
  const VectorField local = radial_cycle_field(1.0, 1.0, 0.0, make_vec({2.5, 0.0}));
  const Vec x = make_vec({3.0, 0.4});
  CHECK((f(x) - local(x)).norm() == doctest::Approx(0.0).epsilon(1e-14));
  // Far outside every disc the field vanishes.
  CHECK(f(make_vec({0.0, 2.0})).norm() == 0.0);
  check_jacobian(f, default_domain("multi-cycle-2"), 5, 2e-5);

  CHECK_THROWS_AS(multi_cycle_field(MultiCycleSpec{{make_vec({0.0, 0.0}), make_vec({1.0, 0.0})},
                                                   1.0, 1.0, 0.0, 1.8, 2.4}),
                  std::invalid_argument);
}

TEST_CASE("ring attractor: circle of equilibria") {
  const VectorField f = ring_attractor_field(1.0);
  for (double th : {0.0, 0.7, 2.1, 4.4}) {
    const Vec p = make_vec({std::cos(th), std::sin(th)});
    CHECK(f(p).norm() == doctest::Approx(0.0).epsilon(1e-14));
    // Radial eigenvalue -2k, tangential 0.
    Eigen::EigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(f.jacobian(p)), false);
    std::vector<double> re{es.eigenvalues()[0].real(), es.eigenvalues()[1].real()};
    std::sort(re.begin(), re.end());
    CHECK(re[0] == doctest::Approx(-2.0).epsilon(1e-10));
    CHECK(re[1] == doctest::Approx(0.0).epsilon(1e-10));
  }
}

TEST_CASE("isochronous cylinder") {
  const IntegratorConfig cfg = IntegratorConfig::oracle();

  SUBCASE("foliation cycles share the period") {
    const VectorField f = iso_cylinder_field(1.0, 1.0, AxialMode::None);
    std::vector<double> periods;
    for (double z : {-0.5, 0.0, 0.5}) {
      const LimitCycle c = find_limit_cycle(f, make_vec({1.0, 0.0, z}), cfg);
      periods.push_back(c.period);
      CHECK(std::abs(c.anchor[2] - z) < 1e-9);  // z is conserved
    }
    CHECK(std::abs(periods[0] - periods[1]) < 1e-8);
    CHECK(std::abs(periods[1] - periods[2]) < 1e-8);
  }

  SUBCASE("axial contraction gives one hyperbolic 3D cycle") {
    const VectorField f = iso_cylinder_field(1.0, 1.0, AxialMode::Linear, 0.7);
    const LimitCycle c = find_limit_cycle(f, make_vec({1.2, 0.0, 0.3}), cfg);
    CHECK(c.period == doctest::Approx(2.0 * M_PI).epsilon(1e-8));
    CHECK(c.hyperbolic);
    // Multipliers: trivial 1, radial e^{-2T}, axial e^{-0.7T}.
    std::vector<double> mods;
    for (const auto& mu : c.multipliers) mods.push_back(std::abs(mu));
    std::sort(mods.begin(), mods.end());
    CHECK(mods[2] == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(mods[1] == doctest::Approx(std::exp(-0.7 * 2.0 * M_PI)).epsilon(1e-5));
    CHECK(mods[0] == doctest::Approx(std::exp(-2.0 * 2.0 * M_PI)).epsilon(1e-3));
  }
}

TEST_CASE("field registry ids") {
  for (const char* id : {"double-well", "radial-cycle", "multi-cycle-2", "ring", "line",
                         "iso-cylinder"}) {
    const VectorField f = make_field(id);
    const Domain d = default_domain(id);
    CHECK(f.dimension() == d.dimension());
  }
  CHECK_THROWS_AS(make_field("no-such-field"), std::invalid_argument);
  CHECK_THROWS_AS(make_field("ring", {{"bogus", 1.0}}), std::invalid_argument);
}

TEST_CASE("rbf approximant") {
  const VectorField target = double_well_field();
  const Domain box = double_well_domain();

  SUBCASE("25 centers reach sub-1e-3 uniform error") {
    RbfFitOptions opts;
    const RbfApproximant rbf = fit_rbf(target, box, opts);
    CHECK(rbf.report().distance_to_target.c0 < 1e-3);
    check_jacobian(rbf.field(), box, 6);
  }

  SUBCASE("zero field fits to zero weights") {
    const VectorField zero(1, [](const Vec& x) { return Vec(Vec::Zero(x.size())); });
    RbfFitOptions opts;
    opts.n_centers = 8;
    const RbfApproximant rbf = fit_rbf(zero, box, opts);
    CHECK(rbf.report().distance_to_target.c0 == 0.0);
  }

  SUBCASE("doubling centers does not worsen the fit") {
    RbfFitOptions coarse;
    coarse.n_centers = 12;
    RbfFitOptions fine = coarse;
    fine.n_centers = 24;
    const double c0_coarse = fit_rbf(target, box, coarse).report().distance_to_target.c0;
    const double c0_fine = fit_rbf(target, box, fine).report().distance_to_target.c0;
    CHECK(c0_fine <= 1.1 * c0_coarse);
  }
}

TEST_CASE("bump functions") {
  const IntegratorConfig cfg = IntegratorConfig::oracle();
  const MultiCycleSpec spec = multi_cycle_2_spec();
  const VectorField f = multi_cycle_field(spec);
  const LimitCycle left = find_limit_cycle(f, make_vec({-2.5 + 1.2, 0.0}), cfg);
  const LimitCycle right = find_limit_cycle(f, make_vec({2.5 + 1.2, 0.0}), cfg);
  const TubeRadii radii = default_tube_radii(multi_cycle_separation(spec));

  const BumpFunction psi(left, radii.r_in, radii.r_out);

  SUBCASE("exact plateau on the cycle, exact zero outside the tube") {
    for (std::size_t i = 0; i < left.points.size(); i += 31) CHECK(psi.value(left.points[i]) == 1.0);
    CHECK(psi.value(make_vec({2.5, 0.0})) == 0.0);
    CHECK(psi.leakage_on(right) == 0.0);
  }

  SUBCASE("aligned vector bump equals the field on-cycle and vanishes off-tube") {
    const VectorBump bump = make_vector_bump(f, left, radii.r_in, radii.r_out);
    CHECK(bump.alignment_nu == doctest::Approx(0.0).epsilon(1e-15));
    const Vec p = left.points[17];
    CHECK((bump.phi(p) - f(p)).norm() == 0.0);
    CHECK(bump.phi(make_vec({2.5, 0.3})).norm() == 0.0);
    CHECK(vector_bump_leakage(bump, right) == 0.0);
  }

  SUBCASE("multiplicative correction field: alpha = 0 is the base") {
    const VectorField c = corrected_field_multiplicative(f, {psi}, {0.0});
    const Vec x = make_vec({-1.6, 0.4});
    CHECK((c(x) - f(x)).norm() == 0.0);
  }

  SUBCASE("outside every tube the corrected field equals the base exactly") {
    const VectorField c = corrected_field_multiplicative(f, {psi}, {0.35});
    const Vec x = make_vec({2.5, -0.2});  // inside the other disc, outside the tube
    CHECK((c(x) - f(x)).norm() == 0.0);
  }

  SUBCASE("sign violation is rejected with a witness") {
    CHECK_THROWS_AS(corrected_field_multiplicative(f, {psi}, {-1.5}), BumpSignError);
  }
}
