#pragma once

// Two-box ocean convection loop with a density-threshold switch.  The state
// is written in a shifted frame (x, y) where x is the box temperature
// anomaly and y = rho - epsilon is the density surplus over the convection
// threshold, so the switch sits exactly on {y = 0}: convection off below
// (branch k = 0), on above (branch k = 1).

#include <array>
#include <functional>

#include "filippov/system.hpp"

namespace welander {

using filippov::Jacobian;
using filippov::Params;
using filippov::PwsSystem;
using filippov::Real;
using filippov::State;
using filippov::Velocity;

/// Physical variables: temperature and salinity anomalies of the upper box.
struct OriginalState {
  Real temperature = 0;
  Real salinity = 0;
};

/// Density anomaly -alpha*T + S thresholded by the convection switch.
[[nodiscard]] Real density(const OriginalState& o, Real alpha);

/// x = T, y = S - alpha*T - epsilon (= rho - epsilon), and back.
[[nodiscard]] State to_shifted(const OriginalState& o, const Params& p);
[[nodiscard]] OriginalState to_physical(const State& s, const Params& p);

/// Right-hand side with the switch frozen at k in {0, 1}.
/// Throws std::invalid_argument for any other k.
[[nodiscard]] Velocity branch_velocity(int k, const Params& p, const State& s);

/// State Jacobian of the frozen branch; constant (the branches are affine).
[[nodiscard]] Jacobian branch_jacobian(int k, const Params& p);

struct EquilibriumInfo {
  State location = State::Zero();
  int branch = 0;
  bool is_virtual = false;            ///< lies strictly outside its own region
  std::array<Real, 2> eigenvalues{};  ///< ascending; exact for this model
  Eigen::Matrix2d eigenvectors = Eigen::Matrix2d::Zero();  ///< unit columns, matched order
};

/// Equilibrium of the frozen branch k with its spectral data.  The branch
/// Jacobian is lower triangular, so the eigenvalues are the diagonal entries
/// -(1+k) and -(beta+k) exactly; no numerical eigensolve is involved.
[[nodiscard]] EquilibriumInfo branch_equilibrium(int k, const Params& p);

/// epsilon values at which each branch equilibrium lands on the switch and
/// disappears into it (boundary collision).  Solved in closed form.
struct BorderCollisions {
  Real epsilon_lower = 0;  ///< k = 0 branch collides (exact value 1/5)
  Real epsilon_upper = 0;  ///< k = 1 branch collides (exact value -1/15)
};
[[nodiscard]] BorderCollisions border_collisions(const Params& p);

/// Filippov system for the hard switch k = [y > 0].  ds_dlambda is supplied
/// in closed form, -(epsilon + y), so sliding stability is exact on {y = 0}.
[[nodiscard]] PwsSystem build_hard_switch(const Params& p);

/// Smoothed switch k(y) = 1/2 + atan(y/a)/pi with boundary-layer width a.
struct SmoothSystem {
  Params params;
  Real a = 1e-3;
  std::function<Velocity(const State&)> field;
  std::function<Jacobian(const State&)> jacobian;
  std::function<Real(Real)> k_of_y;
};
[[nodiscard]] SmoothSystem build_smooth_switch(const Params& p, Real a);

}  // namespace welander
