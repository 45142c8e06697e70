#pragma once

// Scalar root finding used by event localization and the bifurcation
// toolkits.  Small enough to keep in-house; callers always have a bracket.

#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

#include "filippov/types.hpp"

namespace filippov::detail {

/// Brent's method on a bracketing interval [a, b] with f(a) f(b) <= 0.
/// Stops when |f| <= f_tol or the bracket width drops below x_tol.
template <class F>
Real brent(F&& f, Real a, Real b, Real fa, Real fb, Real x_tol, Real f_tol) {
  if (fa == 0) return a;
  if (fb == 0) return b;
  if ((fa > 0) == (fb > 0)) throw std::invalid_argument("brent: endpoints do not bracket");

  Real c = a, fc = fa;
  Real d = b - a, e = d;
  for (int iter = 0; iter < 200; ++iter) {
    if ((fb > 0) == (fc > 0)) {
      c = a;
      fc = fa;
      d = e = b - a;
    }
    if (std::abs(fc) < std::abs(fb)) {
      a = b; b = c; c = a;
      fa = fb; fb = fc; fc = fa;
    }
    const Real tol1 = 2 * std::numeric_limits<Real>::epsilon() * std::abs(b) + 0.5 * x_tol;
    const Real xm = 0.5 * (c - b);
    if (std::abs(xm) <= tol1 || std::abs(fb) <= f_tol) return b;

    if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
      Real p, q;
      const Real s = fb / fa;
      if (a == c) {
        p = 2 * xm * s;
        q = 1 - s;
      } else {
        const Real qq = fa / fc;
        const Real r = fb / fc;
        p = s * (2 * xm * qq * (qq - r) - (b - a) * (r - 1));
        q = (qq - 1) * (r - 1) * (s - 1);
      }
      if (p > 0) q = -q;
      p = std::abs(p);
      if (2 * p < std::min(3 * xm * q - std::abs(tol1 * q), std::abs(e * q))) {
        e = d;
        d = p / q;
      } else {
        d = xm;
        e = d;
      }
    } else {
      d = xm;
      e = d;
    }
    a = b;
    fa = fb;
    b += std::abs(d) > tol1 ? d : (xm > 0 ? tol1 : -tol1);
    fb = f(b);
    if (fb == 0) return b;
  }
  return b;
}

/// Plain bisection to a target bracket width; returns the midpoint.
/// sign_lo is the sign of f at lo (pass what you already evaluated).
template <class F>
Real bisect(F&& f, Real lo, Real hi, bool positive_at_lo, Real x_tol) {
  while (hi - lo > x_tol) {
    const Real mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;  // bracket at floating-point resolution
    const Real fm = f(mid);
    if (fm == 0) return mid;
    if ((fm > 0) == positive_at_lo)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

/// Golden-section maximization of f on a bracketing triple a < b < c with
/// f(b) >= max(f(a), f(c)).  Returns (argmax, max).
template <class F>
std::pair<Real, Real> golden_max(F&& f, Real a, Real b, Real c, Real x_tol) {
  constexpr Real kR = 0.6180339887498949;
  Real x0 = a, x3 = c, x1, x2;
  if (c - b > b - a) {
    x1 = b;
    x2 = b + (1 - kR) * (c - b);
  } else {
    x2 = b;
    x1 = b - (1 - kR) * (b - a);
  }
  Real f1 = f(x1), f2 = f(x2);
  while (std::abs(x3 - x0) > x_tol) {
    if (f1 < f2) {
      x0 = x1;
      x1 = x2;
      f1 = f2;
      x2 = kR * x2 + (1 - kR) * x3;
      f2 = f(x2);
    } else {
      x3 = x2;
      x2 = x1;
      f2 = f1;
      x1 = kR * x1 + (1 - kR) * x0;
      f1 = f(x1);
    }
  }
  return f1 > f2 ? std::make_pair(x1, f1) : std::make_pair(x2, f2);
}

}  // namespace filippov::detail
