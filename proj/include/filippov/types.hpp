#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

/// Shared numeric and geometry types for planar piecewise-smooth dynamics.
///
/// Convention used throughout: states live in the plane, the switching
/// manifold is the zero set of a scalar function h, and the two smooth
/// vector fields are indexed by the side of the manifold they govern
/// (lower: h < 0, upper: h > 0).
namespace filippov {

using Real = double;
using State = Eigen::Vector2d;     ///< planar state (x, y)
using Velocity = Eigen::Vector2d;  ///< time derivative of a state
using Jacobian = Eigen::Matrix2d;

/// Default half-width of the band around {h = 0} treated as "on manifold".
inline constexpr Real kTolH = 1e-10;

/// Parameters of the two-box convection models built on this core.
/// alpha and beta are fixed transport ratios; epsilon is the bifurcation
/// parameter (threshold offset of the convection switch).
struct Params {
  Real alpha = 0.8;
  Real beta = 0.5;
  Real epsilon = 0.0;
};

enum class RegionLabel : std::uint8_t { Lower, Upper, Manifold };

enum class EventKind : std::uint8_t {
  Crossing,            ///< transversal passage through the manifold
  SlideStart,          ///< trajectory attached to a sliding segment
  SlideExit,           ///< sliding lambda* reached 0 or 1; tangential departure
  Escape,              ///< left an unstable sliding point under the configured policy
  EquilibriumReached,  ///< settled within equilibrium_radius of a known equilibrium
  Timeout,             ///< integration reached t_max
};

struct Event {
  Real time = 0;
  State state = State::Zero();
  EventKind kind = EventKind::Timeout;
};

struct TrajectorySample {
  Real time = 0;
  State state = State::Zero();
  RegionLabel region = RegionLabel::Manifold;
};

/// Hybrid trajectory: accepted-step samples plus the chronological event log.
struct Trajectory {
  std::vector<TrajectorySample> samples;
  std::vector<Event> events;

  [[nodiscard]] bool terminated_by(EventKind kind) const {
    return !events.empty() && events.back().kind == kind;
  }
  [[nodiscard]] const TrajectorySample& back() const { return samples.back(); }
};

[[nodiscard]] const char* to_string(RegionLabel label);
[[nodiscard]] const char* to_string(EventKind kind);

}  // namespace filippov
