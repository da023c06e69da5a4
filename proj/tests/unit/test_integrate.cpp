#include "doctest.h"

#include <limits>

#include <cmath>

#include "approx/fields.hpp"
#include "approx/integrate.hpp"
#include "approx/sampling.hpp"
#include "support/oracles.hpp"

using namespace approx;
using namespace approx::testing;

TEST_CASE("double-well endpoint facts") {
  const VectorField f = double_well_field();
  const IntegratorConfig cfg = IntegratorConfig::oracle();

  SUBCASE("monotone decay from x0=2 lands on the +1 equilibrium") {
    const Trajectory traj = integrate(f, make_vec({2.0}), 0.0, 10.0, cfg);
    const double x10 = traj.last_state()[0];
    CHECK(x10 <= 1.0 + 1e-9);
    CHECK(x10 >= 1.0 - 1e-6);
    // Monotone along nodes.
    for (std::size_t i = 1; i < traj.nodes(); ++i)
      CHECK(traj.state(i)[0] <= traj.state(i - 1)[0] + 1e-12);
  }

  SUBCASE("equilibrium initial condition stays put") {
    const Vec x = flow_at(f, make_vec({1.0}), 7.0, cfg);
    CHECK(std::abs(x[0] - 1.0) < 1e-9);
  }

  SUBCASE("x0=0.5, t=5 against tighter-tolerance self oracle and closed form") {
    const Vec x = flow_at(f, make_vec({0.5}), 5.0, cfg);
    IntegratorConfig tight = cfg;
    tight.rtol = cfg.rtol / 100.0;
    tight.atol = cfg.atol / 100.0;
    const Vec x_oracle = flow_at(f, make_vec({0.5}), 5.0, tight);
    CHECK(std::abs(x[0] - x_oracle[0]) <= 1e-7);
    CHECK(std::abs(x[0] - double_well_exact(0.5, 5.0)) <= 1e-8);
  }

  SUBCASE("basin of the -1 attractor") {
    const Vec x = flow_at(f, make_vec({-0.5}), 30.0, cfg);
    CHECK(std::abs(x[0] + 1.0) <= 1e-6);
  }
}

TEST_CASE("flow identities") {
  const VectorField f = double_well_field();
  const IntegratorConfig cfg = IntegratorConfig::oracle();

  SUBCASE("time-zero identity is exact") {
    const Vec x0 = make_vec({1.2345});
    const Vec x = flow_at(f, x0, 0.0, cfg);
    CHECK(x[0] == x0[0]);
  }

  SUBCASE("semigroup property on random points") {
    SampleRng rng(7, 0);
    for (int k = 0; k < 12; ++k) {
      const double x0 = rng.next_in(-1.8, 1.8);
      const double s = rng.next_in(0.1, 3.0);
      const double t = rng.next_in(0.1, 3.0);
      const Vec a = flow_at(f, flow_at(f, make_vec({x0}), s, cfg), t, cfg);
      const Vec b = flow_at(f, make_vec({x0}), s + t, cfg);
      CHECK(std::abs(a[0] - b[0]) < 10.0 * (cfg.atol + cfg.rtol * (1.0 + std::abs(b[0]))) * 1e3);
    }
  }
}

TEST_CASE("planar cycle flow against closed form") {
  const VectorField f = radial_cycle_field(1.0, 1.0, 0.0);
  const IntegratorConfig cfg = IntegratorConfig::oracle();
  const double T = 2.0 * M_PI;

  const Vec x0 = make_vec({2.0, 0.0});
  const Vec xt = flow_at(f, x0, T, cfg);
  const Vec exact = radial_cycle_exact(x0, 1.0, 1.0, T);
  CHECK((xt - exact).norm() < 1e-6);
  // RK4 oracle agrees too.
  const Vec rk = rk4_fixed(f, x0, 0.0, T, 20000);
  CHECK((xt - rk).norm() < 1e-6);
}

TEST_CASE("trajectory dense output") {
  const VectorField f = double_well_field();
  IntegratorConfig cfg = IntegratorConfig::oracle();
  const Trajectory traj = integrate(f, make_vec({1.7}), 0.0, 8.0, cfg);

  SUBCASE("interpolant matches stored states exactly at nodes") {
    for (std::size_t i = 0; i < traj.nodes(); ++i) {
      const Vec xi = traj.at(traj.times()[i]);
      CHECK(xi[0] == traj.state(i)[0]);
    }
  }

  SUBCASE("ODE residual at step midpoints within 10x tolerance scale") {
    for (std::size_t i = 1; i < traj.nodes(); ++i) {
      const double h = traj.times()[i] - traj.times()[i - 1];
      const double tm = 0.5 * (traj.times()[i - 1] + traj.times()[i]);
      const Vec pm = traj.at(tm);
      const Vec pd = traj.deriv_at(tm);
      const Vec fm = f(pm);
      // Same allowance as the integrator's acceptance gate: tolerance scale
      // plus the divided-difference rounding floor.
      const double floor = 8.0 * std::numeric_limits<double>::epsilon() *
                           std::max(traj.state(i - 1).norm(), traj.state(i).norm()) / h;
      CHECK((pd - fm).norm() <= 10.0 * (cfg.atol + cfg.rtol * fm.norm()) + floor);
    }
  }
}

TEST_CASE("self-convergence under tolerance halving") {
  const VectorField f = radial_cycle_field(1.0, 1.0, 0.3);
  IntegratorConfig c1 = IntegratorConfig::oracle();
  c1.rtol = 1e-7;
  c1.atol = 1e-10;
  IntegratorConfig c2 = c1;
  c2.rtol /= 2.0;
  c2.atol /= 2.0;
  IntegratorConfig ref = c1;
  ref.rtol = 1e-12;
  ref.atol = 1e-14;

  const Vec x0 = make_vec({1.4, 0.2});
  const double t = 11.0;
  const double e1 = (flow_at(f, x0, t, c1) - flow_at(f, x0, t, ref)).norm();
  const double e2 = (flow_at(f, x0, t, c2) - flow_at(f, x0, t, ref)).norm();
  CHECK(e2 <= e1 + 1e-12);
}

TEST_CASE("divergence guard reports escape instead of throwing") {
  const VectorField outward(1, [](const Vec& x) { return make_vec({x[0]}); },
                            [](const Vec&) {
                              Mat j(1, 1);
                              j(0, 0) = 1.0;
                              return j;
                            });
  IntegratorConfig cfg = IntegratorConfig::oracle();
  cfg.guard = Domain(make_vec({-1.0}), make_vec({1.0}));
  const Trajectory traj = integrate(outward, make_vec({0.5}), 0.0, 50.0, cfg);
  CHECK(traj.reason() == StopReason::EscapedDomain);
  CHECK(traj.t_end() < 2.0);  // escape happens around t = ln 2
}

TEST_CASE("step underflow reports stiff-or-singular") {
  // x' = -1/x reaches the singularity x=0 at t=0.5 from x0=1.
  const VectorField singular(1, [](const Vec& x) { return make_vec({-1.0 / x[0]}); });
  CHECK_THROWS_AS(integrate(singular, make_vec({1.0}), 0.0, 1.0, IntegratorConfig::oracle()),
                  StiffOrSingularError);
}

TEST_CASE("max_time cap is honored") {
  const VectorField f = double_well_field();
  IntegratorConfig cfg = IntegratorConfig::oracle();
  cfg.max_time = 2.0;
  const Trajectory traj = integrate(f, make_vec({0.5}), 0.0, 100.0, cfg);
  CHECK(traj.reason() == StopReason::MaxTime);
  CHECK(traj.t_end() == doctest::Approx(2.0));
}
