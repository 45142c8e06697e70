#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "oracles.hpp"
#include "welander/model.hpp"

using Catch::Approx;
using filippov::Params;
using filippov::Real;
using filippov::State;
using filippov::Velocity;
using welander::OriginalState;

TEST_CASE("shifted frame round-trips and exposes the density surplus", "[model]") {
  Params p;
  p.epsilon = -0.03;
  const OriginalState o{0.7, 0.4};

  REQUIRE(welander::density(o, p.alpha) == Approx(0.4 - 0.8 * 0.7).margin(1e-15));

  const State s = welander::to_shifted(o, p);
  REQUIRE(s.x() == Approx(0.7).margin(1e-15));
  REQUIRE(s.y() == Approx(welander::density(o, p.alpha) - p.epsilon).margin(1e-15));

  const OriginalState back = welander::to_physical(s, p);
  REQUIRE(back.temperature == Approx(o.temperature).margin(1e-15));
  REQUIRE(back.salinity == Approx(o.salinity).margin(1e-15));
}

TEST_CASE("branch velocities agree with the physical equations", "[model]") {
  std::mt19937 rng(42);
  std::uniform_real_distribution<Real> coord(-1.5, 1.5);
  std::uniform_real_distribution<Real> eps(-0.2, 0.3);

  for (int trial = 0; trial < 50; ++trial) {
    Params p;
    p.epsilon = eps(rng);
    const State s(coord(rng), coord(rng));
    for (int k = 0; k <= 1; ++k) {
      const Velocity got = welander::branch_velocity(k, p, s);
      const Velocity want = oracle::shifted_rhs(k, p, s);
      REQUIRE((got - want).norm() < 1e-13);
    }
  }
  REQUIRE_THROWS_AS(welander::branch_velocity(2, Params{}, State(0, 0)),
                    std::invalid_argument);
}

TEST_CASE("branch Jacobians are the exact affine coefficients", "[model]") {
  const Params p;
  for (int k = 0; k <= 1; ++k) {
    const auto j = welander::branch_jacobian(k, p);
    const auto fd = oracle::fd_jacobian(
        [&](const State& s) { return welander::branch_velocity(k, p, s); }, State(0.4, 0.1),
        1e-6, 1e-6);
    REQUIRE((j - fd).norm() < 1e-9);
    REQUIRE(j(0, 1) == 0.0);                       // x decouples from y
    REQUIRE(j(1, 0) == Approx(0.4).margin(1e-15));  // alpha (1 - beta)
  }
}

TEST_CASE("branch equilibria carry exact spectral data", "[model]") {
  Params p;
  p.epsilon = -0.1;

  const auto on = welander::branch_equilibrium(1, p);
  REQUIRE((on.location - oracle::shifted_equilibrium(1, p)).norm() < 1e-14);
  REQUIRE(welander::branch_velocity(1, p, on.location).norm() < 1e-15);
  REQUIRE(on.eigenvalues[0] == -2.0);  // -(1 + k), exact
  REQUIRE(on.eigenvalues[1] == -1.5);  // -(beta + k), exact
  REQUIRE_FALSE(on.is_virtual);        // y = -1/15 + 0.1 > 0: really convecting

  const auto off = welander::branch_equilibrium(0, p);
  REQUIRE(off.eigenvalues[0] == -1.0);
  REQUIRE(off.eigenvalues[1] == -0.5);
  REQUIRE((off.location - oracle::shifted_equilibrium(0, p)).norm() < 1e-14);

  // Eigenvectors: unit columns satisfying J v = lambda v in matching order.
  for (const auto& info : {on, off}) {
    const auto j = welander::branch_jacobian(info.branch, p);
    for (int c = 0; c < 2; ++c) {
      const Eigen::Vector2d v = info.eigenvectors.col(c);
      REQUIRE(v.norm() == Approx(1.0).margin(1e-14));
      REQUIRE((j * v - info.eigenvalues[c] * v).norm() < 1e-14);
    }
  }
}

TEST_CASE("virtual equilibria lie outside their own region", "[model]") {
  Params p;
  p.epsilon = -0.05;  // between the collisions: both equilibria are virtual
  REQUIRE(welander::branch_equilibrium(1, p).is_virtual);
  REQUIRE(welander::branch_equilibrium(0, p).is_virtual);

  p.epsilon = 0.25;  // quiescent height 1/5 - 1/4 < 0 lies in its own region
  REQUIRE_FALSE(welander::branch_equilibrium(0, p).is_virtual);
  REQUIRE(welander::branch_equilibrium(1, p).is_virtual);

  p.epsilon = -0.1;  // convecting height -1/15 + 1/10 > 0 lies in its own region
  REQUIRE_FALSE(welander::branch_equilibrium(1, p).is_virtual);
  REQUIRE(welander::branch_equilibrium(0, p).is_virtual);
}

TEST_CASE("border collisions sit at the closed-form thresholds", "[model]") {
  const auto bc = welander::border_collisions(Params{});
  REQUIRE(bc.epsilon_lower == Approx(0.2).margin(1e-15));
  REQUIRE(bc.epsilon_upper == Approx(-1.0 / 15).margin(1e-15));

  // At each collision value the equilibrium height vanishes.
  Params p;
  p.epsilon = bc.epsilon_upper;
  REQUIRE(std::abs(welander::branch_equilibrium(1, p).location.y()) < 1e-15);
  p.epsilon = bc.epsilon_lower;
  REQUIRE(std::abs(welander::branch_equilibrium(0, p).location.y()) < 1e-15);
}

TEST_CASE("hard-switch system wires the branches and the exact gap", "[model]") {
  Params p;
  p.epsilon = -0.05;
  const auto sys = welander::build_hard_switch(p);

  const State s(0.7, 0.2);
  REQUIRE(sys.switching_fn(s) == 0.2);
  REQUIRE(sys.grad_h(s).x() == 0.0);
  REQUIRE(sys.grad_h(s).y() == 1.0);
  REQUIRE((sys.field_lower(s) - welander::branch_velocity(0, p, s)).norm() == 0.0);
  REQUIRE((sys.field_upper(s) - welander::branch_velocity(1, p, s)).norm() == 0.0);
  REQUIRE(sys.lambda_dependence == filippov::LambdaDependence::Affine);
  // d/dlambda of the normal projection, closed form -(epsilon + y).
  REQUIRE(sys.ds_dlambda(s) == -(p.epsilon + 0.2));
}

TEST_CASE("smoothed switch interpolates the hard branches", "[model]") {
  Params p;
  p.epsilon = -0.05;
  const Real a = 1e-3;
  const auto sys = welander::build_smooth_switch(p, a);

  REQUIRE(sys.k_of_y(0.0) == 0.5);
  REQUIRE(sys.k_of_y(10 * a) == Approx(0.5 + std::atan(10.0) / std::numbers::pi).margin(1e-15));
  REQUIRE(sys.k_of_y(-10 * a) == Approx(0.5 - std::atan(10.0) / std::numbers::pi).margin(1e-15));

  // Far from the layer the smooth field approaches the frozen branches.
  const State deep_up(0.8, 0.3);
  REQUIRE((sys.field(deep_up) - welander::branch_velocity(1, p, deep_up)).norm() < 2e-3);
  const State deep_down(0.8, -0.3);
  REQUIRE((sys.field(deep_down) - welander::branch_velocity(0, p, deep_down)).norm() < 2e-3);

  REQUIRE_THROWS_AS(welander::build_smooth_switch(p, 0.0), std::invalid_argument);
  REQUIRE_THROWS_AS(welander::build_smooth_switch(p, -1e-3), std::invalid_argument);
}

TEST_CASE("smooth Jacobian matches finite differences through the layer", "[model]") {
  Params p;
  p.epsilon = -0.05;
  const Real a = 1e-3;
  const auto sys = welander::build_smooth_switch(p, a);

  std::mt19937 rng(7);
  std::uniform_real_distribution<Real> xs(0.3, 1.2);
  std::uniform_real_distribution<Real> ys(-0.2, 0.2);
  for (int trial = 0; trial < 40; ++trial) {
    const State s(xs(rng), ys(rng));
    const auto j = sys.jacobian(s);
    const auto fd = oracle::fd_jacobian(sys.field, s, 1e-6, 1e-6);
    REQUIRE((j - fd).norm() / std::max(1.0, j.norm()) < 1e-6);
  }
}
