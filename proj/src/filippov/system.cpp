#include "filippov/system.hpp"

#include <cmath>
#include <stdexcept>

namespace filippov {

namespace {
bool finite(const State& s) { return std::isfinite(s.x()) && std::isfinite(s.y()); }
}  // namespace

Velocity eval_field(const PwsSystem& sys, const State& s, Real lambda) {
  if (!finite(s)) throw std::domain_error("eval_field: non-finite state");
  if (!(lambda >= 0.0 && lambda <= 1.0))
    throw std::domain_error("eval_field: lambda outside [0, 1]");
  if (lambda == 0.0) return sys.field_lower(s);
  if (lambda == 1.0) return sys.field_upper(s);
  if (sys.lambda_dependence == LambdaDependence::General && sys.field_lambda)
    return sys.field_lambda(s, lambda);
  return (1.0 - lambda) * sys.field_lower(s) + lambda * sys.field_upper(s);
}

RegionLabel region_of(const PwsSystem& sys, const State& s, Real tol_h) {
  if (!finite(s)) throw std::domain_error("region_of: non-finite state");
  const Real h = sys.switching_fn(s);
  if (std::abs(h) <= tol_h) return RegionLabel::Manifold;
  return h < 0 ? RegionLabel::Lower : RegionLabel::Upper;
}

const char* to_string(RegionLabel label) {
  switch (label) {
    case RegionLabel::Lower: return "lower";
    case RegionLabel::Upper: return "upper";
    case RegionLabel::Manifold: return "manifold";
  }
  return "?";
}

const char* to_string(EventKind kind) {
  switch (kind) {
    case EventKind::Crossing: return "crossing";
    case EventKind::SlideStart: return "slide_start";
    case EventKind::SlideExit: return "slide_exit";
    case EventKind::Escape: return "escape";
    case EventKind::EquilibriumReached: return "equilibrium_reached";
    case EventKind::Timeout: return "timeout";
  }
  return "?";
}

}  // namespace filippov
