#pragma once

#include <vector>

#include "filippov/flow.hpp"
#include "filippov/sliding.hpp"
#include "filippov/system.hpp"

namespace filippov {

/// Continuation rule at an unstable sliding point.  The escape policies
/// leave the manifold immediately on the chosen side; Hold follows the
/// (repelling) sliding flow until it exits through a boundary, which is how
/// one-parameter families of connecting orbits are constructed.
enum class UnstableSlidePolicy : std::uint8_t { EscapeUpper, EscapeLower, Hold };

struct IntegratorOptions {
  Real rel_tol = 1e-10;
  Real abs_tol = 1e-12;
  Real max_step = 0.25;
  Real t_max = 100.0;
  Real event_tol = 1e-12;
  Real tol_h = kTolH;
  UnstableSlidePolicy unstable_slide_policy = UnstableSlidePolicy::EscapeLower;
  Real equilibrium_radius = 1e-7;
  std::vector<State> known_equilibria;  ///< includes pseudoequilibria, as (x, 0)
};

/// Event-driven hybrid integration of a Filippov system whose switching
/// manifold is the x-axis.  At each manifold hit the point is classified:
/// transversal crossings switch fields and continue, sliding hits attach to
/// the sliding flow (1-D in the manifold coordinate) until lambda* reaches a
/// boundary, an equilibrium, or t_max.  All transitions are logged as
/// events; the last event states why integration ended.
[[nodiscard]] Trajectory integrate(const PwsSystem& sys, const State& s0,
                                   const IntegratorOptions& opts);

}  // namespace filippov
