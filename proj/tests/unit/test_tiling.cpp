#include "doctest.h"

#include <cmath>

#include "approx/closeness.hpp"
#include "approx/tiling.hpp"
#include "support/oracles.hpp"

using namespace approx;

namespace {

AttractorRegistry sink_registry(const VectorField& tiled, const Domain& box,
                                const std::vector<Vec>& sinks) {
  AttractorRegistry reg;
  NewtonOptions opts;
  const auto roots = find_fixed_points(tiled, box, sinks);
  for (const auto& fp : roots)
    if (fp.kind == FixedPointKind::Stable) reg.add(fp);
  reg.finalize(box);
  return reg;
}

}  // namespace

TEST_CASE("tiled ring structure") {
  const TilingSpec spec{4, 0.1, 0.1, 0.0};
  const TiledRing tiled = tile_ring(1.0, spec);
  const Domain box(make_vec({-1.6, -1.6}), make_vec({1.6, 1.6}));

  SUBCASE("sinks at the designed angles with the designed spectra") {
    CHECK_FALSE(tiled.normal_hyperbolicity_warning);
    const auto roots = find_fixed_points(tiled.field, box, 24);
    int stable = 0, saddle = 0;
    for (const auto& fp : roots) {
      if (fp.location.norm() < 0.5) continue;  // skip the unstable origin
      if (fp.kind == FixedPointKind::Stable) {
        ++stable;
        // Radial eigenvalue -2*kappa, tangential -eps_t*k.
        CHECK(fp.eigenvalues[0].real() == doctest::Approx(-2.0).epsilon(0.05));
        CHECK(fp.eigenvalues[1].real() == doctest::Approx(-0.4).epsilon(0.05));
        double nearest = 1e9;
        for (const Vec& s : tiled.sinks) nearest = std::min(nearest, (fp.location - s).norm());
        CHECK(nearest < 1e-8);
      } else if (fp.kind == FixedPointKind::Saddle) {
        ++saddle;
      }
    }
    CHECK(stable == 4);
    CHECK(saddle == 4);
  }

  SUBCASE("strong tiling triggers the normal-hyperbolicity warning") {
    CHECK(tile_ring(1.0, TilingSpec{8, 0.3, 0.1, 0.0}).normal_hyperbolicity_warning);
  }
}

TEST_CASE("tiled line structure") {
  const TilingSpec spec{3, 0.08, 0.1, 0.0};
  const TiledLine tiled = tile_line(-1.0, 1.0, 1.0, 2.0, spec);
  const Domain box(make_vec({-1.8, -1.2}), make_vec({1.8, 1.2}));

  REQUIRE(tiled.sinks.size() == 3);
  CHECK(tiled.sinks[0][0] == doctest::Approx(-1.0));
  CHECK(tiled.sinks[1][0] == doctest::Approx(0.0));
  CHECK(tiled.sinks[2][0] == doctest::Approx(1.0));

  const auto roots = find_fixed_points(tiled.field, box, 24);
  int stable = 0, saddle = 0;
  for (const auto& fp : roots) {
    if (fp.kind == FixedPointKind::Stable) {
      ++stable;
      for (const auto& eig : fp.eigenvalues) CHECK(eig.real() < -1e-3);
    }
    if (fp.kind == FixedPointKind::Saddle) ++saddle;
  }
  CHECK(stable == 3);  // endpoints included
  CHECK(saddle == 2);
}

TEST_CASE("D-type displacement on the tiled ring") {
  const IntegratorConfig cfg = IntegratorConfig::sweep();
  const VectorField ring = ring_attractor_field(1.0);
  const Domain box(make_vec({-1.6, -1.6}), make_vec({1.6, 1.6}));

  // Annulus samples away from the unstable origin.
  std::vector<Vec> samples;
  for (int i = 0; i < 600; ++i) {
    const Vec u = low_discrepancy_point(2, 77, i);
    const double r = 0.4 + 1.0 * u[0];
    const double th = 2.0 * M_PI * u[1];
    samples.push_back(make_vec({r * std::cos(th), r * std::sin(th)}));
  }

  auto run_k = [&](int k) {
    const TiledRing tiled = tile_ring(1.0, TilingSpec{k, 0.1, 0.1, 0.0});
    const AttractorRegistry reg = sink_registry(tiled.field, box, tiled.sinks);
    REQUIRE(reg.size() == static_cast<std::size_t>(k));
    return measure_dtype_error(ring, tiled.field, reg, tiled.spacing, box, samples, cfg, 400.0);
  };

  const TilingReport r8 = run_k(8);
  CHECK(r8.n_unresolved < 10);
  CHECK(r8.fraction_exceeding_spacing == 0.0);
  // Max displacement approaches the half-spacing chord.
  CHECK(r8.max_displacement <= 2.0 * std::sin(M_PI / 8 / 2.0) + 1e-6);
  CHECK(r8.max_displacement > 0.8 * 2.0 * std::sin(M_PI / 8 / 2.0));

  SUBCASE("sample at a sink angle has (near) zero displacement") {
    const TiledRing tiled = tile_ring(1.0, TilingSpec{8, 0.1, 0.1, 0.0});
    const AttractorRegistry reg = sink_registry(tiled.field, box, tiled.sinks);
    const TilingReport rep = measure_dtype_error(ring, tiled.field, reg, tiled.spacing, box,
                                                 {make_vec({1.3, 0.0})}, cfg, 400.0);
    REQUIRE(rep.displacements.size() == 1);
    CHECK(rep.displacements[0] < 1e-6);
  }

  SUBCASE("doubling k halves the max displacement") {
    const TilingReport r16 = run_k(16);
    CHECK(r16.max_displacement / r8.max_displacement == doctest::Approx(0.5).epsilon(0.2));
  }
}

TEST_CASE("isochronous cylinder tiling") {
  const IntegratorConfig cfg = IntegratorConfig::oracle();

  SUBCASE("three tiles corrected to the common period") {
    TilingSpec spec{3, 0.1, 0.4, 0.02};
    const TiledCylinder tiled = tile_iso_cylinder(1.0, 1.0, -0.5, 0.5, spec, cfg);
    REQUIRE(tiled.cycles.size() == 3);
    CHECK(tiled.isochrony_spread < 1e-8);

    // The detune moved the uncorrected periods apart.
    bool detuned = false;
    for (const auto& z : tiled.z_levels) {
      const LimitCycle c = find_limit_cycle(tiled.uncorrected, make_vec({1.0, 0.0, z}), cfg);
      if (std::abs(c.period - tiled.common_period) > 1e-4) detuned = true;
    }
    CHECK(detuned);

    for (const auto& c : tiled.cycles) {
      CHECK(std::abs(c.period - tiled.common_period) / tiled.common_period < 1e-6);
      CHECK(c.hyperbolic);
    }
    // Pairwise period agreement.
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = i + 1; j < 3; ++j)
        CHECK(std::abs(tiled.cycles[i].period - tiled.cycles[j].period) /
                  tiled.common_period <
              2e-6);

    // Inter-tile phase drift of the corrected skeleton.
    const PhaseDriftResult drift =
        phase_drift(tiled.field, tiled.cycles[0], tiled.cycles[0].anchor, tiled.field,
                    tiled.cycles[2], tiled.cycles[2].anchor, 40, cfg);
    CHECK(std::abs(drift.slope_per_rev) < 1e-6);
  }

  SUBCASE("frequency gradient breaks isochrony and is rejected") {
    TilingSpec spec{3, 0.1, 0.4, 0.0};
    CHECK_THROWS_AS(tile_iso_cylinder(1.0, 1.0, -0.5, 0.5, spec, cfg, 1e-8, 0.05),
                    IsochronyError);
  }
}
