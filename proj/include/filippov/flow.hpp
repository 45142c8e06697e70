#pragma once

#include <functional>
#include <vector>

#include "filippov/rk45.hpp"
#include "filippov/types.hpp"

namespace filippov {

using VectorField = std::function<Velocity(const State&)>;

/// Scalar section g(s) = 0 monitored while flowing a smooth field.
/// direction restricts which sign changes count: +1 only g increasing,
/// -1 only decreasing, 0 either.  skip ignores that many qualifying
/// crossings before stopping.
struct SectionSpec {
  std::function<Real(const State&)> g;
  int direction = 0;
  int skip = 0;
};

struct FlowOptions {
  Real rel_tol = 1e-10;
  Real abs_tol = 1e-12;
  Real max_step = 0.25;
  Real t_end = 100.0;       ///< absolute stop time
  Real event_tol = 1e-12;   ///< |g| band treated as "on the section"
  std::function<Real(const State&)> step_cap;  ///< optional per-state cap on h
  std::vector<State> stop_points;              ///< proximity stops
  Real stop_radius = 1e-7;
  bool record = true;                          ///< collect samples
  RegionLabel label = RegionLabel::Manifold;   ///< region tag for samples
};

enum class FlowStop : std::uint8_t { Section, Point, Time };

struct FlowResult {
  FlowStop stop = FlowStop::Time;
  Real t = 0;
  State s = State::Zero();
  int direction = 0;       ///< sign of dg/dt at a Section stop
  int point_index = -1;    ///< index into stop_points for a Point stop
  int crossings_seen = 0;  ///< qualifying crossings encountered (incl. skipped)
  std::vector<TrajectorySample> samples;
};

/// Integrate a smooth field until a section crossing, a proximity stop, or
/// t_end.  Section crossings are located on the dense output of each
/// accepted step (interior scan + Brent), so the returned state satisfies
/// |g| <= event_tol.  A proximity stop requires the state to remain within
/// stop_radius over one full accepted step, so grazing passes do not stop
/// the flow.  Throws StepUnderflow if error control collapses.
[[nodiscard]] FlowResult flow(const VectorField& f, const State& s0, Real t0,
                              const FlowOptions& opts, const SectionSpec* section = nullptr);

}  // namespace filippov
