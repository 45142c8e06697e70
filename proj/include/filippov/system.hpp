#pragma once

#include <functional>

#include "filippov/types.hpp"

namespace filippov {

/// How the blended field depends on the interpolation parameter lambda.
/// Affine systems admit closed-form sliding parameters; anything else falls
/// back to bracketed root finding.
enum class LambdaDependence : std::uint8_t { Affine, General };

/// Planar piecewise-smooth system with a single switching manifold {h = 0}.
///
/// field_lower / field_upper must be smooth on the whole plane (both sides
/// admit evaluation across the manifold; the sliding analysis depends on
/// that). grad_h is the analytic gradient of switching_fn and must not
/// vanish on the manifold.
///
/// ds_dlambda, when supplied, is the closed form of
///     d/dlambda [ f(s, lambda) . grad h ] = (field_upper - field_lower) . grad h.
/// Builders that know this expression should provide it: it avoids the
/// cancellation incurred by subtracting two nearly equal projections and
/// makes sliding stability signs exact.
///
/// field_lambda is consulted only when lambda_dependence == General, where
/// the blended field is not the convex combination of the endpoint fields.
struct PwsSystem {
  std::function<Velocity(const State&)> field_lower;
  std::function<Velocity(const State&)> field_upper;
  std::function<Real(const State&)> switching_fn;
  std::function<Velocity(const State&)> grad_h;
  LambdaDependence lambda_dependence = LambdaDependence::Affine;
  std::function<Real(const State&)> ds_dlambda;               // optional
  std::function<Velocity(const State&, Real)> field_lambda;   // optional, General only
};

/// Filippov blend f(s, lambda) for lambda in [0, 1].  The endpoints return
/// the pure branch fields exactly (no floating-point blending).
/// Throws std::domain_error for a non-finite state or lambda outside [0, 1].
[[nodiscard]] Velocity eval_field(const PwsSystem& sys, const State& s, Real lambda);

/// Side of the manifold s lies on, within tol_h.
[[nodiscard]] RegionLabel region_of(const PwsSystem& sys, const State& s, Real tol_h = kTolH);

}  // namespace filippov
