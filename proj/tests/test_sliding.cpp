#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <stdexcept>

#include "filippov/sliding.hpp"
#include "welander/model.hpp"

using Catch::Approx;
using filippov::ManifoldPointClass;
using filippov::Params;
using filippov::PwsSystem;
using filippov::Real;
using filippov::SlidingRoot;
using filippov::State;
using filippov::Velocity;

namespace {

PwsSystem convection(Real epsilon) {
  Params p;
  p.epsilon = epsilon;
  return welander::build_hard_switch(p);
}

/// Sliding interval endpoints in closed form: the roots of the two normal
/// projections S0(x) = -3/10 - eps/2 + 2x/5 and S1 = S0 - eps.
Real s0_root(Real eps) { return 0.75 + 1.25 * eps; }
Real s1_root(Real eps) { return 0.75 + 3.75 * eps; }

/// System whose blended field is genuinely nonlinear in lambda.
PwsSystem nonlinear_blend() {
  PwsSystem sys;
  sys.field_lower = [](const State&) { return Velocity(1.0, (0.0 - 0.3) * (0.0 + 2.0)); };
  sys.field_upper = [](const State&) { return Velocity(1.0, (1.0 - 0.3) * (1.0 + 2.0)); };
  sys.switching_fn = [](const State& s) { return s.y(); };
  sys.grad_h = [](const State&) { return Velocity(0.0, 1.0); };
  sys.lambda_dependence = filippov::LambdaDependence::General;
  sys.field_lambda = [](const State&, Real lam) {
    return Velocity(1.0, (lam - 0.3) * (lam + 2.0));
  };
  return sys;
}

}  // namespace

TEST_CASE("normal projection requires an on-manifold state", "[sliding]") {
  const PwsSystem sys = convection(-0.05);

  REQUIRE_THROWS_AS(filippov::normal_projection(sys, State(0.6, 0.1), 0.0), std::domain_error);
  // S0(0.6) = -3/10 + 1/40 + 6/25
  REQUIRE(filippov::normal_projection(sys, State(0.6, 0.0), 0.0) == Approx(-0.035).margin(1e-15));
  REQUIRE(filippov::normal_projection(sys, State(0.6, 0.0), 1.0) == Approx(0.015).margin(1e-15));
}

TEST_CASE("sliding lambda solves the affine combination in closed form", "[sliding]") {
  const Real eps = -0.05;
  const PwsSystem sys = convection(eps);

  // Frozen oracle: at the sliding-flow equilibrium x = 0.60634763241977652
  // the combination parameter is S0/eps.
  const SlidingRoot mid = filippov::sliding_lambda(sys, State(0.60634763241977652, 0.0));
  REQUIRE(mid.lambda_star.has_value());
  REQUIRE(*mid.lambda_star == Approx(0.64921894064178787).epsilon(1e-12));
  REQUIRE_FALSE(mid.degenerate);

  // Interval endpoints give the boundary values exactly.
  const SlidingRoot at0 = filippov::sliding_lambda(sys, State(s0_root(eps), 0.0));
  REQUIRE(at0.lambda_star.has_value());
  REQUIRE(*at0.lambda_star == Approx(0.0).margin(1e-13));
  const SlidingRoot at1 = filippov::sliding_lambda(sys, State(s1_root(eps), 0.0));
  REQUIRE(at1.lambda_star.has_value());
  REQUIRE(*at1.lambda_star == Approx(1.0).margin(1e-13));

  // Outside the interval there is no root.
  REQUIRE_FALSE(filippov::sliding_lambda(sys, State(0.9, 0.0)).lambda_star.has_value());
  REQUIRE_FALSE(filippov::sliding_lambda(sys, State(0.4, 0.0)).lambda_star.has_value());
}

TEST_CASE("fused threshold makes the combination degenerate", "[sliding]") {
  // At eps = 0 the two projections coincide, so S does not depend on lambda.
  const PwsSystem sys = convection(0.0);
  const SlidingRoot r = filippov::sliding_lambda(sys, State(0.6, 0.0));
  REQUIRE(r.degenerate);
  REQUIRE_FALSE(r.lambda_star.has_value());
}

TEST_CASE("manifold points classify by the projection signs", "[sliding]") {
  const PwsSystem below = convection(-0.05);
  REQUIRE(filippov::classify_manifold_point(below, State(0.8, 0.0)) ==
          ManifoldPointClass::Crossing);
  REQUIRE(filippov::classify_manifold_point(below, State(0.4, 0.0)) ==
          ManifoldPointClass::Crossing);
  REQUIRE(filippov::classify_manifold_point(below, State(0.6, 0.0)) ==
          ManifoldPointClass::UnstableSliding);
  REQUIRE(filippov::classify_manifold_point(below, State(s0_root(-0.05), 0.0)) ==
          ManifoldPointClass::Tangency);
  REQUIRE(filippov::classify_manifold_point(below, State(s1_root(-0.05), 0.0)) ==
          ManifoldPointClass::Tangency);

  const PwsSystem above = convection(0.05);
  REQUIRE(filippov::classify_manifold_point(above, State(0.9, 0.0)) ==
          ManifoldPointClass::StableSliding);
}

TEST_CASE("sliding stability sign is the exact closed form", "[sliding]") {
  // The builder supplies ds/dlambda = -(eps + y), so on the manifold the
  // stability sign equals -eps bitwise.
  for (const Real eps : {-0.05, -0.01, 0.0, 0.01, 0.2}) {
    const PwsSystem sys = convection(eps);
    for (const Real x : {0.1, 0.6, 0.75, 1.3})
      REQUIRE(filippov::sliding_stability_sign(sys, State(x, 0.0)) == -eps);
  }
}

TEST_CASE("sliding velocity is tangent to the manifold", "[sliding]") {
  const PwsSystem sys = convection(-0.05);
  const State s(0.62, 0.0);

  const Velocity v = filippov::sliding_velocity(sys, s);
  REQUIRE(std::abs(v.y()) < 1e-12);

  // dx/dt = 1 - (1 + lambda*) x with lambda* = S0(x)/eps.
  const Real lam = *filippov::sliding_lambda(sys, s).lambda_star;
  REQUIRE(v.x() == Approx(1.0 - (1.0 + lam) * 0.62).epsilon(1e-12));

  REQUIRE_THROWS_AS(filippov::sliding_velocity(sys, State(0.9, 0.0)), std::domain_error);
  REQUIRE_THROWS_AS(filippov::sliding_vector_field(sys, 0.9), std::domain_error);
}

TEST_CASE("sliding region endpoints are the projection roots", "[sliding]") {
  for (const Real eps : {-0.05, -1.0 / 15, 0.01}) {
    const auto bounds = filippov::sliding_region_bounds(convection(eps));
    REQUIRE(bounds.size() == 1);
    const Real lo = std::min(s0_root(eps), s1_root(eps));
    const Real hi = std::max(s0_root(eps), s1_root(eps));
    REQUIRE(bounds.front().lo == Approx(lo).margin(1e-13));
    REQUIRE(bounds.front().hi == Approx(hi).margin(1e-13));
    REQUIRE_FALSE(bounds.front().degenerate());
  }
}

TEST_CASE("sliding region collapses to a point at the fused threshold", "[sliding]") {
  const auto bounds = filippov::sliding_region_bounds(convection(0.0));
  REQUIRE(bounds.size() == 1);
  REQUIRE(bounds.front().degenerate());
  REQUIRE(bounds.front().lo == Approx(0.75).margin(1e-12));
}

TEST_CASE("general lambda dependence falls back to bracketed root finding", "[sliding]") {
  const PwsSystem sys = nonlinear_blend();
  const State s(0.0, 0.0);

  // S(lambda) = (lambda - 0.3)(lambda + 2) has its [0, 1] root at 0.3.
  const SlidingRoot r = filippov::sliding_lambda(sys, s);
  REQUIRE(r.lambda_star.has_value());
  REQUIRE(*r.lambda_star == Approx(0.3).margin(1e-10));

  // dS/dlambda at 0.3 is 2*0.3 + 1.7 = 2.3 > 0: repelling.
  REQUIRE(filippov::sliding_stability_sign(sys, s) == Approx(2.3).epsilon(1e-6));
  REQUIRE(filippov::classify_manifold_point(sys, s) == ManifoldPointClass::UnstableSliding);

  const Velocity v = filippov::sliding_velocity(sys, s);
  REQUIRE(v.x() == Approx(1.0).margin(1e-12));
  REQUIRE(std::abs(v.y()) < 1e-10);
}

TEST_CASE("bundled analysis agrees with the piecewise queries", "[sliding]") {
  const Real eps = -0.05;
  const PwsSystem sys = convection(eps);
  const filippov::SlidingAnalysis a = filippov::analyze_sliding(sys);

  REQUIRE(a.bounds.size() == 1);
  REQUIRE(a.stability_sign == Approx(-eps).margin(1e-15));
  const SlidingRoot r = a.lambda_star(0.6);
  REQUIRE(r.lambda_star.has_value());
  REQUIRE(*r.lambda_star == Approx(0.7).epsilon(1e-12));
}
