#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <stdexcept>

#include "welander/nonsmooth.hpp"
#include "welander/smooth.hpp"

using Catch::Approx;
using filippov::Params;
using filippov::Real;

namespace {

constexpr Real kA = 1e-3;

Params with_eps(Real e) {
  Params p;
  p.epsilon = e;
  return p;
}

}  // namespace

TEST_CASE("smoothed equilibrium sits in the boundary layer", "[smooth]") {
  const auto eq = welander::smooth_equilibrium(with_eps(-0.065), kA);
  const auto sys = welander::build_smooth_switch(with_eps(-0.065), kA);
  REQUIRE(sys.field(eq.location).norm() < 1e-10);

  // x-nullcline: x = 1/(1 + k(y)) exactly at the equilibrium.
  REQUIRE(eq.location.x() ==
          Approx(1.0 / (1.0 + sys.k_of_y(eq.location.y()))).epsilon(1e-12));

  // It continues the hard-switch pseudoequilibrium (x ~ 0.5168 here) and
  // sits a few layer widths above the switch.
  const auto pseudos = welander::find_pseudoequilibria(with_eps(-0.065));
  REQUIRE(pseudos.size() == 1);
  REQUIRE(std::abs(eq.location.x() - pseudos.front().x) < 0.02);
  REQUIRE(eq.location.y() > 0.0);
  REQUIRE(eq.location.y() < 20 * kA);

  REQUIRE(eq.trace == Approx(eq.jacobian.trace()).margin(1e-14));
  REQUIRE(eq.det == Approx(eq.jacobian.determinant()).margin(1e-14));
}

TEST_CASE("smoothed equilibrium continues the convecting branch", "[smooth]") {
  const auto eq = welander::smooth_equilibrium(with_eps(-0.1), kA);
  REQUIRE(eq.location.x() == Approx(0.5).margin(5e-3));
  REQUIRE(eq.location.y() == Approx(1.0 / 30).margin(1e-3));
  REQUIRE(eq.stable);
  REQUIRE(eq.trace < 0.0);
  REQUIRE(eq.det > 0.0);
}

TEST_CASE("the subcritical trace zero sits near the explosion value", "[smooth]") {
  const auto hits = welander::hopf_scan(Params{}, kA, -0.067, -0.063);
  REQUIRE(hits.size() == 1);
  REQUIRE(hits.front().epsilon > -0.067);
  REQUIRE(hits.front().epsilon < -0.063);
  REQUIRE(hits.front().omega > 0.0);

  // The trace really vanishes there.
  const auto eq = welander::smooth_equilibrium(with_eps(hits.front().epsilon), kA);
  REQUIRE(std::abs(eq.trace) < 1e-5);

  // A wide layer has no trace zero in this window.
  REQUIRE(welander::hopf_scan(Params{}, 1e-2, -0.067, -0.063).empty());
}

TEST_CASE("a second trace zero sits near epsilon zero for narrow layers", "[smooth]") {
  // The equilibrium that smooths the fused point loses stability a little
  // below zero; reference value -0.0079635370 (independent root of the
  // analytic trace along the equilibrium branch).
  const auto hits = welander::hopf_scan(Params{}, kA, -0.02, -0.002);
  REQUIRE(hits.size() == 1);
  REQUIRE(hits.front().epsilon == Approx(-0.0079635370).margin(1e-5));

  // For a wide layer the unstable window closes: no zero here either.
  REQUIRE(welander::hopf_scan(Params{}, 1e-2, -0.02, -0.002).empty());
}

TEST_CASE("the upward return map rejects non-transversal launches", "[smooth]") {
  // At x = 0.55 the field still points downward through the section.
  REQUIRE_THROWS_AS(welander::smooth_return_map(0.55, with_eps(-0.064), kA),
                    std::domain_error);
}

TEST_CASE("orbit counting separates the regimes", "[smooth]") {
  welander::SmoothOptions opts;

  const auto above = welander::find_smooth_orbits(with_eps(-0.0633), kA, opts);
  REQUIRE(above.size() >= 1);
  bool any_stable = false;
  for (const auto& orb : above) {
    REQUIRE(orb.section_x > 0.45);
    REQUIRE(orb.section_x < 1.15);
    REQUIRE(orb.period > 0.0);
    if (orb.stable) {
      any_stable = true;
      REQUIRE(std::abs(orb.multiplier) < 1.0);
    }
  }
  REQUIRE(any_stable);

  // Fixed-point residual of the stable orbit.
  for (const auto& orb : above) {
    if (!orb.stable) continue;
    const Real r = welander::smooth_return_map(orb.section_x, with_eps(-0.0633), kA, opts);
    REQUIRE(std::abs(r - orb.section_x) < 1e-7);
  }

  // The fold sits near -0.06643 (reference bisection on the asymptotic
  // attractor); comfortably below it only the equilibrium remains.
  const auto below = welander::find_smooth_orbits(with_eps(-0.0668), kA, opts);
  REQUIRE(below.empty());
}

TEST_CASE("the orbit fold is bracketed and pinned", "[smooth]") {
  welander::SmoothOptions coarse;
  coarse.snpo_tol = 1e-4;  // unit-test speed; the study drives it tighter

  const Real fold = welander::snpo_locate(kA, -0.0670, -0.0635, coarse);
  REQUIRE(fold > -0.0670);
  REQUIRE(fold < -0.0635);

  // The fold precedes the trace zero (bistability window in between).
  const auto hopf = welander::hopf_scan(Params{}, kA, -0.067, -0.063);
  REQUIRE(hopf.size() == 1);
  REQUIRE(fold < hopf.front().epsilon);

  REQUIRE_THROWS_AS(welander::snpo_locate(kA, -0.075, -0.070, coarse),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(welander::snpo_locate(kA, -0.0635, -0.0670, coarse),
                    std::invalid_argument);
}
