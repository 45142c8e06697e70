#include "welander/model.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace welander {

namespace {

void check_branch(int k) {
  if (k != 0 && k != 1) throw std::invalid_argument("branch index must be 0 or 1");
}

/// Shared right-hand side, valid for any switch value k in [0, 1].
Velocity velocity_at(Real k, const Params& p, const State& s) {
  return {1.0 - (1.0 + k) * s.x(),
          p.beta - p.beta * p.epsilon - k * p.epsilon - p.alpha - (p.beta + k) * s.y() +
              (p.alpha - p.alpha * p.beta) * s.x()};
}

}  // namespace

Real density(const OriginalState& o, Real alpha) {
  return -alpha * o.temperature + o.salinity;
}

State to_shifted(const OriginalState& o, const Params& p) {
  return {o.temperature, o.salinity - p.alpha * o.temperature - p.epsilon};
}

OriginalState to_physical(const State& s, const Params& p) {
  return {s.x(), s.y() + p.alpha * s.x() + p.epsilon};
}

Velocity branch_velocity(int k, const Params& p, const State& s) {
  check_branch(k);
  return velocity_at(static_cast<Real>(k), p, s);
}

Jacobian branch_jacobian(int k, const Params& p) {
  check_branch(k);
  Jacobian j;
  j << -(1.0 + k), 0.0,  //
      p.alpha - p.alpha * p.beta, -(p.beta + k);
  return j;
}

EquilibriumInfo branch_equilibrium(int k, const Params& p) {
  check_branch(k);
  EquilibriumInfo info;
  info.branch = k;
  const Real x = 1.0 / (1.0 + k);
  const Real y = (p.beta - p.beta * p.epsilon - k * p.epsilon - p.alpha +
                  (p.alpha - p.alpha * p.beta) * x) /
                 (p.beta + k);
  info.location = State(x, y);
  // Branch k governs y < 0 (k = 0) or y > 0 (k = 1); an equilibrium on the
  // wrong side is virtual.  One sitting exactly on the switch is a genuine
  // boundary equilibrium, not virtual.
  info.is_virtual = (k == 0) ? (y > 0.0) : (y < 0.0);
  info.eigenvalues = {-(1.0 + k), -(p.beta + k)};
  Eigen::Vector2d fast(1.0, -p.alpha);
  info.eigenvectors.col(0) = fast.normalized();
  info.eigenvectors.col(1) = Eigen::Vector2d(0.0, 1.0);
  return info;
}

BorderCollisions border_collisions(const Params& p) {
  auto collide = [&p](int k) {
    const Real x = 1.0 / (1.0 + k);
    return (p.beta - p.alpha + (p.alpha - p.alpha * p.beta) * x) / (p.beta + k);
  };
  return {collide(0), collide(1)};
}

PwsSystem build_hard_switch(const Params& p) {
  PwsSystem sys;
  sys.field_lower = [p](const State& s) { return velocity_at(0.0, p, s); };
  sys.field_upper = [p](const State& s) { return velocity_at(1.0, p, s); };
  sys.switching_fn = [](const State& s) { return s.y(); };
  sys.grad_h = [](const State&) { return Velocity(0.0, 1.0); };
  sys.lambda_dependence = filippov::LambdaDependence::Affine;
  // Closed form of (field_upper - field_lower) . grad_h: subtracting the two
  // projections would cancel all the shared terms in floating point, this
  // keeps the sliding stability sign exactly -(epsilon + y).
  sys.ds_dlambda = [p](const State& s) { return -(p.epsilon + s.y()); };
  return sys;
}

SmoothSystem build_smooth_switch(const Params& p, Real a) {
  if (!(a > 0.0)) throw std::invalid_argument("boundary-layer width a must be positive");
  constexpr Real pi = std::numbers::pi_v<Real>;
  SmoothSystem sys;
  sys.params = p;
  sys.a = a;
  sys.k_of_y = [a, pi](Real y) { return 0.5 + std::atan(y / a) / pi; };
  sys.field = [p, a, pi](const State& s) {
    const Real k = 0.5 + std::atan(s.y() / a) / pi;
    return velocity_at(k, p, s);
  };
  sys.jacobian = [p, a, pi](const State& s) {
    const Real k = 0.5 + std::atan(s.y() / a) / pi;
    const Real kp = a / (pi * (a * a + s.y() * s.y()));
    Jacobian j;
    j << -(1.0 + k), -kp * s.x(),  //
        p.alpha - p.alpha * p.beta, -(p.beta + k) - kp * (p.epsilon + s.y());
    return j;
  };
  return sys;
}

}  // namespace welander
