#pragma once

// Independent reference computations for the test suite.  Everything here
// is derived straight from the physical two-box equations or from closed
// forms (triangular matrix exponential, quadratic formula), deliberately
// not reusing the library's code paths.

#include <array>
#include <cmath>
#include <optional>
#include <utility>

#include "filippov/types.hpp"

namespace oracle {

using filippov::Jacobian;
using filippov::Params;
using filippov::Real;
using filippov::State;
using filippov::Velocity;

/// Physical two-box equations with the switch frozen at k:
///   dT/dt = 1 - (1 + k) T,   dS/dt = beta - (beta + k) S.
inline std::pair<Real, Real> physical_rhs(Real k, const Params& p, Real T, Real S) {
  return {1.0 - (1.0 + k) * T, p.beta - (p.beta + k) * S};
}

/// Shifted-frame velocity obtained through the chain rule on the physical
/// equations: x = T, y = S - alpha T - epsilon.
inline Velocity shifted_rhs(Real k, const Params& p, const State& s) {
  const Real T = s.x();
  const Real S = s.y() + p.alpha * T + p.epsilon;
  const auto [dT, dS] = physical_rhs(k, p, T, S);
  return {dT, dS - p.alpha * dT};
}

/// Equilibrium of the frozen branch in physical coordinates, shifted.
inline State shifted_equilibrium(Real k, const Params& p) {
  const Real T = 1.0 / (1.0 + k);
  const Real S = p.beta / (p.beta + k);
  return {T, S - p.alpha * T - p.epsilon};
}

/// Flow of the frozen (affine) branch via the lower-triangular matrix
/// exponential: with J = [[a, 0], [c, d]],
///   exp(Jt) = [[e^{at}, 0], [c (e^{at} - e^{dt})/(a - d), e^{dt}]].
inline State affine_flow(Real k, const Params& p, const State& s0, Real t) {
  const Real a = -(1.0 + k);
  const Real d = -(p.beta + k);
  const Real c = p.alpha - p.alpha * p.beta;
  const State eq = shifted_equilibrium(k, p);
  const State w = s0 - eq;
  const Real eat = std::exp(a * t);
  const Real edt = std::exp(d * t);
  State out;
  out.x() = eq.x() + eat * w.x();
  out.y() = eq.y() + c * (eat - edt) / (a - d) * w.x() + edt * w.y();
  return out;
}

/// Roots of A x^2 + B x + C = 0 (A != 0), ascending, via the
/// cancellation-safe quadratic formula.  Empty when the discriminant is
/// negative.
inline std::optional<std::array<Real, 2>> quadratic_roots(Real A, Real B, Real C) {
  const Real disc = B * B - 4 * A * C;
  if (disc < 0) return std::nullopt;
  const Real q = -0.5 * (B + std::copysign(std::sqrt(disc), B));
  Real r1, r2;
  if (q == 0.0) {
    r1 = r2 = 0.0;
  } else {
    r1 = q / A;
    r2 = C / q;
  }
  if (r1 > r2) std::swap(r1, r2);
  return std::array<Real, 2>{r1, r2};
}

/// Central finite-difference Jacobian of a planar field.
template <typename Field>
Jacobian fd_jacobian(const Field& f, const State& s, Real hx, Real hy) {
  Jacobian j;
  const Velocity fxp = f(State(s.x() + hx, s.y()));
  const Velocity fxm = f(State(s.x() - hx, s.y()));
  const Velocity fyp = f(State(s.x(), s.y() + hy));
  const Velocity fym = f(State(s.x(), s.y() - hy));
  j.col(0) = (fxp - fxm) / (2 * hx);
  j.col(1) = (fyp - fym) / (2 * hy);
  return j;
}

/// Polynomial extrapolation (Neville) of the samples (xs, ys) to x_target.
template <std::size_t N>
Real extrapolate(const std::array<Real, N>& xs, const std::array<Real, N>& ys, Real x_target) {
  std::array<Real, N> q = ys;
  for (std::size_t level = 1; level < N; ++level)
    for (std::size_t i = 0; i + level < N; ++i)
      q[i] = ((x_target - xs[i + level]) * q[i] + (xs[i] - x_target) * q[i + 1]) /
             (xs[i] - xs[i + level]);
  return q[0];
}

}  // namespace oracle
