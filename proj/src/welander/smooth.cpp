#include "welander/smooth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

#include "filippov/detail/roots.hpp"
#include "filippov/flow.hpp"
#include "welander/nonsmooth.hpp"

namespace welander {
namespace {

using filippov::FlowOptions;
using filippov::FlowResult;
using filippov::FlowStop;
using filippov::SectionSpec;

/// y-nullcline residual after eliminating x through the x-nullcline
/// x = 1/(1 + k(y)); its zeros are the equilibria of the smoothed system.
Real scalar_residual(const SmoothSystem& sys, Real y) {
  const Real x = 1.0 / (1.0 + sys.k_of_y(y));
  return sys.field(State(x, y)).y();
}

/// Where the hard-switch attractor predicts the equilibrium height: the
/// non-virtual branch equilibrium outside the collision window, the layer
/// height where k(y) matches the sliding combination inside it.
Real predicted_y(const Params& p, Real a) {
  const BorderCollisions bc = border_collisions(p);
  if (p.epsilon <= bc.epsilon_upper) return branch_equilibrium(1, p).location.y();
  if (p.epsilon >= bc.epsilon_lower) return branch_equilibrium(0, p).location.y();
  if (p.epsilon == 0.0) return 0.0;
  const auto pseudos = find_pseudoequilibria(p);
  if (pseudos.empty()) return 0.0;
  const Real lam = std::clamp(pseudos.front().lambda_star, 1e-6, 1.0 - 1e-6);
  return a * std::tan(std::numbers::pi_v<Real> * (lam - 0.5));
}

struct ReturnHit {
  Real x = 0;
  Real period = 0;
};

/// One upward Poincare return, or nothing when the launch is not
/// transversal, the flow settles into the equilibrium, or time runs out.
std::optional<ReturnHit> try_return(const SmoothSystem& sys, Real x0, const State& eq,
                                    const SmoothOptions& opts) {
  if (!(sys.field(State(x0, 0.0)).y() > 0)) return std::nullopt;

  FlowOptions fo;
  fo.rel_tol = opts.rel_tol;
  fo.abs_tol = opts.abs_tol;
  fo.event_tol = opts.event_tol;
  fo.t_end = opts.t_max;
  fo.record = false;
  fo.stop_points = {eq};
  fo.stop_radius = 1e-7;
  // Keep steps short inside the boundary layer so the section scan cannot
  // straddle it.
  const Real zone = 60 * sys.a;
  const Real cap = 12 * sys.a;
  fo.step_cap = [zone, cap](const State& s) {
    return std::abs(s.y()) < zone ? cap : std::numeric_limits<Real>::infinity();
  };

  SectionSpec section;
  section.g = [](const State& s) { return s.y(); };
  section.direction = +1;

  const FlowResult r = filippov::flow(sys.field, State(x0, 0.0), 0.0, fo, &section);
  if (r.stop != FlowStop::Section) return std::nullopt;
  return ReturnHit{r.s.x(), r.t};
}

std::size_t orbit_count(Real a, Real epsilon, const SmoothOptions& opts) {
  Params p;
  p.epsilon = epsilon;
  return find_smooth_orbits(p, a, opts).size();
}

}  // namespace

SmoothEquilibrium smooth_equilibrium(const Params& p, Real a, const SmoothOptions& opts) {
  const SmoothSystem sys = build_smooth_switch(p, a);

  // Candidate heights: a coarse sweep of [-1, 1] plus a geometric ladder
  // through the boundary layer on both sides.
  std::vector<Real> ys;
  ys.reserve(256);
  for (int i = 0; i <= 200; ++i) ys.push_back(-1.0 + i / 100.0);
  for (int sign = -1; sign <= 1; sign += 2)
    for (Real m = 0.01; m * a <= 1.0; m *= 2.0) ys.push_back(sign * m * a);
  ys.push_back(0.0);
  std::sort(ys.begin(), ys.end());
  ys.erase(std::unique(ys.begin(), ys.end()), ys.end());

  auto g = [&sys](Real y) { return scalar_residual(sys, y); };

  std::vector<Real> roots;
  Real prev_y = ys.front();
  Real prev_g = g(prev_y);
  for (std::size_t i = 1; i < ys.size(); ++i) {
    const Real cur_y = ys[i];
    const Real cur_g = g(cur_y);
    if (prev_g == 0.0) {
      roots.push_back(prev_y);
    } else if (cur_g != 0.0 && (prev_g > 0) != (cur_g > 0)) {
      roots.push_back(filippov::detail::brent(g, prev_y, cur_y, prev_g, cur_g, 1e-15, 0.0));
    }
    prev_y = cur_y;
    prev_g = cur_g;
  }
  if (g(prev_y) == 0.0) roots.push_back(prev_y);
  if (roots.empty())
    throw std::runtime_error("smooth_equilibrium: no equilibrium height in [-1, 1]");

  const Real target = predicted_y(p, a);
  Real best = roots.front();
  for (const Real r : roots)
    if (std::abs(r - target) < std::abs(best - target)) best = r;

  // Damped planar Newton polish.
  State s(1.0 / (1.0 + sys.k_of_y(best)), best);
  for (int it = 0; it < opts.newton_max_iter; ++it) {
    const Velocity f = sys.field(s);
    if (f.norm() < opts.newton_tol) break;
    const Velocity step = sys.jacobian(s).fullPivLu().solve(f);
    Real scale = 1.0;
    State cand = s - step;
    for (int h = 0; h < 30 && sys.field(cand).norm() > f.norm(); ++h) {
      scale *= 0.5;
      cand = s - scale * step;
    }
    s = cand;
  }
  if (sys.field(s).norm() > 1e-9)
    throw std::runtime_error("smooth_equilibrium: Newton polish did not converge");

  SmoothEquilibrium out;
  out.location = s;
  out.jacobian = sys.jacobian(s);
  out.trace = out.jacobian.trace();
  out.det = out.jacobian.determinant();
  out.stable = out.trace < 0 && out.det > 0;
  return out;
}

std::vector<HopfPoint> hopf_scan(const Params& base, Real a, Real eps_lo, Real eps_hi,
                                 const SmoothOptions& opts) {
  if (!(eps_lo < eps_hi)) throw std::invalid_argument("hopf_scan: empty epsilon range");

  auto trace_at = [&](Real e) {
    Params p = base;
    p.epsilon = e;
    return smooth_equilibrium(p, a, opts).trace;
  };

  std::vector<HopfPoint> out;
  const int n = std::max(2, opts.hopf_grid);
  Real prev_e = eps_lo;
  Real prev_t = trace_at(eps_lo);
  for (int i = 1; i <= n; ++i) {
    const Real e = eps_lo + (eps_hi - eps_lo) * i / n;
    const Real tr = trace_at(e);
    if ((prev_t > 0) != (tr > 0)) {
      const Real star = filippov::detail::bisect(trace_at, prev_e, e, prev_t > 0, 1e-10);
      Params p = base;
      p.epsilon = star;
      const SmoothEquilibrium eq = smooth_equilibrium(p, a, opts);
      if (eq.det > 0) out.push_back({star, eq.location, std::sqrt(eq.det)});
    }
    prev_e = e;
    prev_t = tr;
  }
  return out;
}

Real smooth_return_map(Real x, const Params& p, Real a, const SmoothOptions& opts) {
  const SmoothSystem sys = build_smooth_switch(p, a);
  if (!(sys.field(State(x, 0.0)).y() > 0))
    throw std::domain_error("smooth_return_map: launch at x is not transversal upward");
  const SmoothEquilibrium eq = smooth_equilibrium(p, a, opts);
  const auto hit = try_return(sys, x, eq.location, opts);
  if (!hit)
    throw std::runtime_error("smooth_return_map: flow did not return to the section");
  return hit->x;
}

std::vector<SmoothOrbit> find_smooth_orbits(const Params& p, Real a,
                                            const SmoothOptions& opts) {
  const SmoothSystem sys = build_smooth_switch(p, a);
  const SmoothEquilibrium eq = smooth_equilibrium(p, a, opts);

  auto displacement = [&](Real x) -> std::optional<Real> {
    const auto hit = try_return(sys, x, eq.location, opts);
    if (!hit) return std::nullopt;
    return hit->x - x;
  };

  // Section samples: uniform window plus a geometric cluster right of the
  // equilibrium where small orbits cross.
  std::vector<Real> xs;
  const int n = std::max(8, opts.section_grid);
  xs.reserve(static_cast<std::size_t>(n) + 16);
  for (int i = 0; i <= n; ++i)
    xs.push_back(opts.section_lo + (opts.section_hi - opts.section_lo) * i / n);
  for (Real d = 0.2; d >= 1e-4; d *= 0.5) xs.push_back(eq.location.x() + d);
  std::sort(xs.begin(), xs.end());

  std::vector<Real> sx, sg;  // samples where the map is defined
  for (const Real x : xs) {
    if (const auto gv = displacement(x)) {
      sx.push_back(x);
      sg.push_back(*gv);
    }
  }

  std::vector<std::pair<Real, Real>> brackets;
  for (std::size_t i = 0; i + 1 < sx.size(); ++i)
    if (sg[i] != 0.0 && sg[i + 1] != 0.0 && (sg[i] > 0) != (sg[i + 1] > 0))
      brackets.emplace_back(sx[i], sx[i + 1]);

  // Refine the largest interior extremum that stays on one side of zero: a
  // root pair between adjacent samples shows up as a bump whose tip pokes
  // through zero under golden-section refinement.
  auto harden = [&](int dir) {
    int best = -1;
    for (int i = 1; i + 1 < static_cast<int>(sx.size()); ++i) {
      if (dir * sg[i] >= dir * sg[i - 1] && dir * sg[i] >= dir * sg[i + 1]) {
        if (best < 0 || dir * sg[i] > dir * sg[best]) best = i;
      }
    }
    if (best < 0 || dir * sg[best] > 0) return;
    auto f = [&](Real x) {
      const auto gv = displacement(x);
      return gv ? dir * *gv : -std::numeric_limits<Real>::infinity();
    };
    const auto [xm, fm] =
        filippov::detail::golden_max(f, sx[best - 1], sx[best], sx[best + 1], 1e-6);
    if (fm > 0) {
      brackets.emplace_back(sx[best - 1], xm);
      brackets.emplace_back(xm, sx[best + 1]);
    }
  };
  harden(+1);
  harden(-1);

  std::vector<Real> roots;
  for (auto [lo, hi] : brackets) {
    const auto glo = displacement(lo);
    const auto ghi = displacement(hi);
    if (!glo || !ghi || *glo == 0.0 || *ghi == 0.0 || ((*glo > 0) == (*ghi > 0)))
      continue;
    const bool positive_lo = *glo > 0;
    int guard = 0;
    while (hi - lo > opts.fp_tol && guard++ < 200) {
      Real mid = 0.5 * (lo + hi);
      auto gm = displacement(mid);
      for (int nudge = 0; !gm && nudge < 4; ++nudge) {
        mid = 0.5 * (mid + hi);
        gm = displacement(mid);
      }
      if (!gm) break;
      if ((*gm > 0) == positive_lo)
        lo = mid;
      else
        hi = mid;
    }
    roots.push_back(0.5 * (lo + hi));
  }

  std::sort(roots.begin(), roots.end());
  roots.erase(std::unique(roots.begin(), roots.end(),
                          [&](Real u, Real v) { return std::abs(u - v) < opts.orbit_dedupe; }),
              roots.end());

  std::vector<SmoothOrbit> out;
  for (const Real x : roots) {
    const auto hit = try_return(sys, x, eq.location, opts);
    if (!hit) continue;
    SmoothOrbit orb;
    orb.epsilon = p.epsilon;
    orb.a = a;
    orb.section_x = x;
    orb.period = hit->period;
    const Real d = 1e-5;
    const auto rp = try_return(sys, x + d, eq.location, opts);
    const auto rm = try_return(sys, x - d, eq.location, opts);
    orb.multiplier = (rp && rm) ? (rp->x - rm->x) / (2 * d)
                                : std::numeric_limits<Real>::quiet_NaN();
    orb.stable = std::abs(orb.multiplier) < 1.0;
    out.push_back(orb);
  }
  return out;
}

Real snpo_locate(Real a, Real eps_lo, Real eps_hi, const SmoothOptions& opts) {
  if (!(eps_lo < eps_hi)) throw std::invalid_argument("snpo_locate: empty epsilon bracket");
  if (orbit_count(a, eps_hi, opts) < 1)
    throw std::invalid_argument("snpo_locate: no periodic orbit at the upper bracket end");
  if (orbit_count(a, eps_lo, opts) != 0)
    throw std::invalid_argument("snpo_locate: orbits already present at the lower bracket end");

  Real lo = eps_lo;
  Real hi = eps_hi;
  while (hi - lo > opts.snpo_tol) {
    const Real mid = 0.5 * (lo + hi);
    if (orbit_count(a, mid, opts) >= 1)
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

std::vector<LimitStudyRow> limit_study(const std::vector<Real>& widths,
                                       const SmoothOptions& opts) {
  std::vector<LimitStudyRow> out;
  out.reserve(widths.size());
  const Real explosion = border_collisions(Params{}).epsilon_upper;
  for (const Real a : widths) {
    const auto hopfs = hopf_scan(Params{}, a, explosion - 8e-4, -0.055, opts);
    if (hopfs.size() != 1)
      throw std::runtime_error("limit_study: expected one trace zero near the explosion, got " +
                               std::to_string(hopfs.size()) + " for a = " + std::to_string(a));
    const Real eh = hopfs.front().epsilon;

    // Probe a fold bracket below the trace zero: widen geometrically until
    // orbits appear at the top and vanish at the bottom.
    Real w = 5e-5;
    Real hi = eh - w;
    int guard = 0;
    while (orbit_count(a, hi, opts) < 1 && guard++ < 14) {
      w *= 2.0;
      hi = eh - w;
    }
    if (orbit_count(a, hi, opts) < 1)
      throw std::runtime_error("limit_study: found no orbits below the trace zero");
    Real lo = hi;
    guard = 0;
    do {
      w *= 2.0;
      lo = eh - w;
    } while (orbit_count(a, lo, opts) >= 1 && guard++ < 14);
    if (orbit_count(a, lo, opts) >= 1)
      throw std::runtime_error("limit_study: found no orbit-free level below the fold");

    const Real esn = snpo_locate(a, lo, hi, opts);
    out.push_back({a, eh, esn, eh - esn});
  }
  return out;
}

}  // namespace welander
