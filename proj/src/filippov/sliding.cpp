#include "filippov/sliding.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "filippov/detail/roots.hpp"

namespace filippov {

namespace {

void require_on_manifold(const PwsSystem& sys, const State& s, Real tol_h, const char* who) {
  const Real h = sys.switching_fn(s);
  if (!(std::abs(h) <= tol_h))
    throw std::domain_error(std::string(who) + ": state is off the manifold");
}

/// dS/dlambda for the affine case, preferring the builder's closed form.
Real affine_gap(const PwsSystem& sys, const State& s) {
  if (sys.ds_dlambda) return sys.ds_dlambda(s);
  const Velocity diff = sys.field_upper(s) - sys.field_lower(s);
  return diff.dot(sys.grad_h(s));
}

}  // namespace

Real normal_projection(const PwsSystem& sys, const State& s, Real lambda, Real tol_h) {
  require_on_manifold(sys, s, tol_h, "normal_projection");
  return eval_field(sys, s, lambda).dot(sys.grad_h(s));
}

SlidingRoot sliding_lambda(const PwsSystem& sys, const State& s, Real tol_h) {
  const Real s0 = normal_projection(sys, s, 0.0, tol_h);
  const Real s1 = normal_projection(sys, s, 1.0, tol_h);

  if (sys.lambda_dependence == LambdaDependence::Affine || !sys.field_lambda) {
    const Real gap = affine_gap(sys, s);
    if (gap == 0.0) return {std::nullopt, true};
    const Real l = -s0 / gap;
    // Rounding can push the closed-form root an ulp outside [0,1] when the
    // query sits at a sliding-interval endpoint; accept a hair of slack and
    // clamp so endpoint queries are deterministic.
    constexpr Real kSlack = 1e-10;
    if (l >= -kSlack && l <= 1.0 + kSlack) return {std::clamp(l, 0.0, 1.0), false};
    return {std::nullopt, false};
  }

  // General lambda dependence: bracketed root finding on S(lambda).
  if (s0 == 0.0) return {0.0, false};
  if (s1 == 0.0) return {1.0, false};
  if ((s0 > 0) == (s1 > 0)) return {std::nullopt, false};
  auto S = [&](Real l) { return eval_field(sys, s, l).dot(sys.grad_h(s)); };
  const Real root = detail::brent(S, 0.0, 1.0, s0, s1, 1e-15, 0.0);
  return {root, false};
}

ManifoldPointClass classify_manifold_point(const PwsSystem& sys, const State& s, Real tol,
                                           Real tol_h) {
  const Real s0 = normal_projection(sys, s, 0.0, tol_h);
  const Real s1 = normal_projection(sys, s, 1.0, tol_h);
  if (std::abs(s0) <= tol || std::abs(s1) <= tol) return ManifoldPointClass::Tangency;
  if ((s0 > 0) == (s1 > 0)) return ManifoldPointClass::Crossing;
  return s0 > 0 ? ManifoldPointClass::StableSliding : ManifoldPointClass::UnstableSliding;
}

Real sliding_stability_sign(const PwsSystem& sys, const State& s, Real tol_h) {
  require_on_manifold(sys, s, tol_h, "sliding_stability_sign");
  if (sys.lambda_dependence == LambdaDependence::General && sys.field_lambda) {
    // Derivative of S at lambda*, by central difference; fall back to the
    // secant over [0, 1] when there is no interior root.
    const SlidingRoot root = sliding_lambda(sys, s, tol_h);
    auto S = [&](Real l) { return eval_field(sys, s, l).dot(sys.grad_h(s)); };
    if (root.lambda_star) {
      const Real l = *root.lambda_star;
      const Real d = 1e-6;
      const Real lo = std::max(0.0, l - d), hi = std::min(1.0, l + d);
      return (S(hi) - S(lo)) / (hi - lo);
    }
    return S(1.0) - S(0.0);
  }
  return affine_gap(sys, s);
}

Velocity sliding_velocity(const PwsSystem& sys, const State& s, Real tol_h) {
  const SlidingRoot root = sliding_lambda(sys, s, tol_h);
  if (!root.lambda_star)
    throw std::domain_error("sliding_velocity: not a sliding point (no lambda* in [0, 1])");
  return eval_field(sys, s, *root.lambda_star);
}

Real sliding_vector_field(const PwsSystem& sys, Real x_on_manifold) {
  const State s(x_on_manifold, 0.0);
  return sliding_velocity(sys, s).x();
}

namespace {

/// Root of an affine scalar function of x sampled on the manifold {y = 0}.
/// Returns NaN when the function is (numerically) constant.
template <class G>
Real affine_root(G&& g) {
  const Real g0 = g(0.0);
  const Real g1 = g(1.0);
  const Real slope = g1 - g0;
  if (slope == 0.0) return std::numeric_limits<Real>::quiet_NaN();
  return -g0 / slope;
}

template <class G>
bool affine_in_x(G&& g, Real lo, Real hi) {
  const Real a = g(lo), m = g(0.5 * (lo + hi)), b = g(hi);
  const Real scale = std::max({std::abs(a), std::abs(m), std::abs(b), Real(1)});
  return std::abs(a + b - 2 * m) <= 1e-9 * scale;
}

}  // namespace

std::vector<SlidingInterval> sliding_region_bounds(const PwsSystem& sys, Real window_lo,
                                                   Real window_hi) {
  if (!(window_lo < window_hi))
    throw std::invalid_argument("sliding_region_bounds: empty window");
  // This parameterization assumes the manifold is the x-axis.
  require_on_manifold(sys, State(0.5 * (window_lo + window_hi), 0.0), kTolH,
                      "sliding_region_bounds");

  auto S0 = [&](Real x) { return sys.field_lower(State(x, 0.0)).dot(sys.grad_h(State(x, 0.0))); };
  auto S1 = [&](Real x) { return sys.field_upper(State(x, 0.0)).dot(sys.grad_h(State(x, 0.0))); };

  if (affine_in_x(S0, window_lo, window_hi) && affine_in_x(S1, window_lo, window_hi)) {
    const Real r0 = affine_root(S0);
    const Real r1 = affine_root(S1);
    if (std::isnan(r0) || std::isnan(r1)) return {};
    const Real scale = std::max({std::abs(r0), std::abs(r1), Real(1)});
    if (std::abs(r0 - r1) <= 1e-13 * scale) {
      const Real x = 0.5 * (r0 + r1);
      return {SlidingInterval{x, x}};  // boundaries fused: empty interior
    }
    SlidingInterval iv{std::min(r0, r1), std::max(r0, r1)};
    const State mid(0.5 * (iv.lo + iv.hi), 0.0);
    const auto cls = classify_manifold_point(sys, mid);
    if (cls == ManifoldPointClass::StableSliding || cls == ManifoldPointClass::UnstableSliding)
      return {iv};
    return {};
  }

  // Generic fallback: scan for runs where lambda* exists, refine the edges.
  constexpr int kScan = 2000;
  auto is_sliding = [&](Real x) {
    return sliding_lambda(sys, State(x, 0.0)).lambda_star.has_value();
  };
  std::vector<SlidingInterval> out;
  const Real dx = (window_hi - window_lo) / kScan;
  bool prev = is_sliding(window_lo);
  Real run_start = prev ? window_lo : 0;
  for (int i = 1; i <= kScan; ++i) {
    const Real x = window_lo + i * dx;
    const bool cur = is_sliding(x);
    if (cur && !prev) {
      run_start = detail::bisect([&](Real u) { return is_sliding(u) ? 1.0 : -1.0; }, x - dx, x,
                                 false, 1e-12);
    } else if (!cur && prev) {
      const Real run_end = detail::bisect([&](Real u) { return is_sliding(u) ? 1.0 : -1.0; },
                                          x - dx, x, true, 1e-12);
      out.push_back({run_start, run_end});
    }
    prev = cur;
  }
  if (prev) out.push_back({run_start, window_hi});
  return out;
}

SlidingAnalysis analyze_sliding(const PwsSystem& sys) {
  SlidingAnalysis out;
  out.lambda_star = [&sys](Real x) { return sliding_lambda(sys, State(x, 0.0)); };
  out.bounds = sliding_region_bounds(sys);
  Real x_ref = 0.0;
  if (!out.bounds.empty()) x_ref = 0.5 * (out.bounds.front().lo + out.bounds.front().hi);
  out.stability_sign = sliding_stability_sign(sys, State(x_ref, 0.0));
  return out;
}

}  // namespace filippov
