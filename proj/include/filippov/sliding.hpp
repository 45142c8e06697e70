#pragma once

#include <optional>
#include <vector>

#include "filippov/system.hpp"

namespace filippov {

/// Sign pattern of the normal projections S(0), S(1) at an on-manifold point.
/// Crossing: both fields pierce the manifold the same way.  Sliding: the
/// fields oppose normally; stable when they point toward the manifold.
enum class ManifoldPointClass : std::uint8_t {
  Crossing,
  StableSliding,
  UnstableSliding,
  Tangency,  ///< one of the projections vanishes within tolerance
};

/// Normal component S(lambda) = f(s, lambda) . grad h(s).
/// Throws std::domain_error when |h(s)| > tol_h (off-manifold input).
[[nodiscard]] Real normal_projection(const PwsSystem& sys, const State& s, Real lambda,
                                     Real tol_h = kTolH);

/// Root of S(lambda) = 0 in [0, 1], if any.  degenerate is set when S does
/// not depend on lambda at this point, so no isolated root exists.
struct SlidingRoot {
  std::optional<Real> lambda_star;
  bool degenerate = false;
};
[[nodiscard]] SlidingRoot sliding_lambda(const PwsSystem& sys, const State& s,
                                         Real tol_h = kTolH);

[[nodiscard]] ManifoldPointClass classify_manifold_point(const PwsSystem& sys, const State& s,
                                                         Real tol = 1e-12, Real tol_h = kTolH);

/// dS/dlambda on the manifold: negative means attracting (stable) sliding.
/// Uses the system's closed-form ds_dlambda when available.
[[nodiscard]] Real sliding_stability_sign(const PwsSystem& sys, const State& s,
                                          Real tol_h = kTolH);

/// Filippov sliding velocity f(s, lambda*(s)); tangent to the manifold by
/// construction.  Throws std::domain_error when s is not a sliding point.
[[nodiscard]] Velocity sliding_velocity(const PwsSystem& sys, const State& s,
                                        Real tol_h = kTolH);

/// Scalar sliding flow for systems whose manifold is the x-axis: dx/dt at
/// (x, 0).  Throws std::domain_error outside the sliding region.
[[nodiscard]] Real sliding_vector_field(const PwsSystem& sys, Real x_on_manifold);

struct SlidingInterval {
  Real lo = 0;
  Real hi = 0;
  /// Empty interior (boundary roots coincide): sliding collapses to a point.
  [[nodiscard]] bool degenerate() const { return !(lo < hi); }
};

/// x-extent of the sliding region(s) on the manifold {y = 0}.  When both
/// normal projections are affine in x the endpoints are solved exactly from
/// two samples; otherwise a scan over [window_lo, window_hi] brackets them.
[[nodiscard]] std::vector<SlidingInterval> sliding_region_bounds(const PwsSystem& sys,
                                                                 Real window_lo = -4.0,
                                                                 Real window_hi = 6.0);

/// Bundle of sliding data for one system, manifold parameterized by x.
struct SlidingAnalysis {
  std::function<SlidingRoot(Real)> lambda_star;  ///< lambda* as a function of x
  std::vector<SlidingInterval> bounds;
  Real stability_sign = 0;  ///< dS/dlambda sampled on the sliding set
};
[[nodiscard]] SlidingAnalysis analyze_sliding(const PwsSystem& sys);

}  // namespace filippov
