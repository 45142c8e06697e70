#include "filippov/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "filippov/detail/roots.hpp"
#include "filippov/rk45.hpp"

namespace filippov {

namespace {

constexpr int kMaxLegs = 100000;
constexpr Real kClassifyTol = 1e-12;

int sgn_tol(Real g, Real tol) {
  if (std::abs(g) <= tol) return 0;
  return g > 0 ? 1 : -1;
}

/// Outcome of one sliding leg along the manifold {y = 0}.
struct SlideOutcome {
  enum class Kind : std::uint8_t { Exit, Equilibrium, Timeout } kind = Kind::Timeout;
  Real t = 0;
  Real x = 0;
  int side = 0;  ///< Exit only: +1 detach into Upper, -1 into Lower
};

/// Follow the Filippov sliding flow from (x0, 0) until lambda* reaches a
/// boundary of [0, 1], an equilibrium is held, or t_max.  The two boundary
/// guards are the normal projections themselves: lambda* = 0 iff S(0) = 0
/// and lambda* = 1 iff S(1) = 0, which avoids dividing by the gap.
SlideOutcome slide_leg(const PwsSystem& sys, Real x0, Real t0, const IntegratorOptions& opts,
                       std::vector<TrajectorySample>& samples) {
  auto S = [&sys](int which, Real x) {
    const State p(x, 0.0);
    const auto& f = which == 0 ? sys.field_lower : sys.field_upper;
    return f(p).dot(sys.grad_h(p));
  };
  const Real tol = opts.event_tol;

  auto exit_side = [&](int fired_guard, Real x) -> int {
    const Real other = S(1 - fired_guard, x);
    const int side = sgn_tol(other, tol);
    if (side == 0)
      throw std::runtime_error("slide_leg: degenerate exit, both normal projections vanish");
    return side;
  };

  // Entered at (or within tolerance of) a boundary: detach immediately.
  if (std::abs(S(0, x0)) <= tol) return {SlideOutcome::Kind::Exit, t0, x0, exit_side(0, x0)};
  if (std::abs(S(1, x0)) <= tol) return {SlideOutcome::Kind::Exit, t0, x0, exit_side(1, x0)};

  {
    const SlidingRoot r = sliding_lambda(sys, State(x0, 0.0), opts.tol_h);
    if (r.degenerate)
      throw std::runtime_error("slide_leg: dS/dlambda = 0, sliding flow undefined");
  }

  for (std::size_t i = 0; i < opts.known_equilibria.size(); ++i) {
    if ((State(x0, 0.0) - opts.known_equilibria[i]).norm() <= opts.equilibrium_radius)
      return {SlideOutcome::Kind::Equilibrium, t0, x0, 0};
  }

  auto lambda_for = [&sys, &opts, &S](Real x) -> Real {
    const SlidingRoot r = sliding_lambda(sys, State(x, 0.0), opts.tol_h);
    if (r.lambda_star) return *r.lambda_star;
    // Trial stages may probe just outside the sliding set; clamp to the
    // nearer boundary so the right-hand side stays defined.
    return std::abs(S(0, x)) <= std::abs(S(1, x)) ? 0.0 : 1.0;
  };
  auto rhs = [&](const VecN<1>& xv) -> VecN<1> {
    VecN<1> out;
    out[0] = eval_field(sys, State(xv[0], 0.0), lambda_for(xv[0])).x();
    return out;
  };

  VecN<1> x_init;
  x_init[0] = x0;
  Dopri5<1, decltype(rhs)> ode(rhs, t0, x_init, {opts.rel_tol, opts.abs_tol, opts.max_step});

  samples.push_back({t0, State(x0, 0.0), RegionLabel::Manifold});

  int last_strict[2] = {sgn_tol(S(0, x0), tol), sgn_tol(S(1, x0), tol)};
  std::vector<char> prev_in(opts.known_equilibria.size(), 0);
  constexpr int kScan = 8;

  while (true) {
    const Real h_cap = opts.t_max - ode.t();
    if (h_cap <= 1e-13 * std::max(Real(1), std::abs(opts.t_max)))
      return {SlideOutcome::Kind::Timeout, ode.t(), ode.y()[0], 0};
    const DenseStep<1>& step = ode.advance(h_cap);

    Real theta_ref[2] = {0.0, 0.0};
    for (int j = 1; j <= kScan; ++j) {
      const Real theta = static_cast<Real>(j) / kScan;
      const Real xj = step.eval(theta)[0];
      for (int k = 0; k < 2; ++k) {
        const Real gj = S(k, xj);
        const int sgn_j = sgn_tol(gj, tol);
        if (sgn_j == 0) continue;
        if (sgn_j != last_strict[k]) {
          auto g_of = [&](Real th) { return S(k, step.eval(th)[0]); };
          const Real g_ref = g_of(theta_ref[k]);
          const Real theta_star =
              std::abs(g_ref) <= tol
                  ? theta_ref[k]
                  : detail::brent(g_of, theta_ref[k], theta, g_ref, gj, 1e-15, tol);
          const Real x_star = step.eval(theta_star)[0];
          const Real t_star = step.t0 + theta_star * step.h;
          samples.push_back({t_star, State(x_star, 0.0), RegionLabel::Manifold});
          return {SlideOutcome::Kind::Exit, t_star, x_star, exit_side(k, x_star)};
        }
        last_strict[k] = sgn_j;
        theta_ref[k] = theta;
      }
    }

    samples.push_back({ode.t(), State(ode.y()[0], 0.0), RegionLabel::Manifold});

    for (std::size_t i = 0; i < opts.known_equilibria.size(); ++i) {
      const bool in_now =
          (State(ode.y()[0], 0.0) - opts.known_equilibria[i]).norm() <= opts.equilibrium_radius;
      if (in_now && prev_in[i])
        return {SlideOutcome::Kind::Equilibrium, ode.t(), ode.y()[0], 0};
      prev_in[i] = in_now ? 1 : 0;
    }
  }
}

}  // namespace

Trajectory integrate(const PwsSystem& sys, const State& s0, const IntegratorOptions& opts) {
  Trajectory traj;
  auto add_event = [&traj](EventKind kind, Real t, const State& s) {
    traj.events.push_back({t, s, kind});
  };
  auto append_samples = [&traj](std::vector<TrajectorySample>&& v) {
    std::size_t first = 0;
    if (!traj.samples.empty() && !v.empty() && v.front().time == traj.samples.back().time)
      first = 1;  // leg junction: do not duplicate the shared sample
    traj.samples.insert(traj.samples.end(), std::make_move_iterator(v.begin() + first),
                        std::make_move_iterator(v.end()));
  };

  Real t = 0;
  State s = s0;

  for (const State& p : opts.known_equilibria) {
    if ((s - p).norm() <= opts.equilibrium_radius) {
      traj.samples.push_back({t, s, region_of(sys, s, opts.tol_h)});
      add_event(EventKind::EquilibriumReached, t, s);
      return traj;
    }
  }

  RegionLabel region = region_of(sys, s, opts.tol_h);
  // Region flown before the current manifold hit; Manifold means "none"
  // (initial launch on the manifold, or just detached from sliding).
  RegionLabel incoming = RegionLabel::Manifold;

  for (int leg = 0; leg < kMaxLegs; ++leg) {
    if (region != RegionLabel::Manifold) {
      FlowOptions fo;
      fo.rel_tol = opts.rel_tol;
      fo.abs_tol = opts.abs_tol;
      fo.max_step = opts.max_step;
      fo.t_end = opts.t_max;
      fo.event_tol = opts.event_tol;
      fo.stop_points = opts.known_equilibria;
      fo.stop_radius = opts.equilibrium_radius;
      fo.label = region;
      SectionSpec sec;
      sec.g = sys.switching_fn;
      sec.direction = region == RegionLabel::Lower ? +1 : -1;

      const auto& field =
          region == RegionLabel::Lower ? sys.field_lower : sys.field_upper;
      FlowResult r = flow(field, s, t, fo, &sec);
      append_samples(std::move(r.samples));
      t = r.t;
      s = r.s;
      switch (r.stop) {
        case FlowStop::Time:
          add_event(EventKind::Timeout, t, s);
          return traj;
        case FlowStop::Point:
          add_event(EventKind::EquilibriumReached, t, s);
          return traj;
        case FlowStop::Section:
          s.y() = 0.0;  // the manifold is the x-axis; project exactly onto it
          incoming = region;
          region = RegionLabel::Manifold;
          break;
      }
      continue;
    }

    // On the manifold: classify and dispatch.
    const Real a = sys.field_lower(s).dot(sys.grad_h(s));
    const Real b = sys.field_upper(s).dot(sys.grad_h(s));
    const ManifoldPointClass cls = classify_manifold_point(sys, s, kClassifyTol, opts.tol_h);

    bool do_slide = false;
    switch (cls) {
      case ManifoldPointClass::Crossing:
        add_event(EventKind::Crossing, t, s);
        region = a > 0 ? RegionLabel::Upper : RegionLabel::Lower;
        break;
      case ManifoldPointClass::StableSliding:
        do_slide = true;
        break;
      case ManifoldPointClass::UnstableSliding:
        switch (opts.unstable_slide_policy) {
          case UnstableSlidePolicy::EscapeUpper:
            add_event(EventKind::Escape, t, s);
            region = RegionLabel::Upper;
            break;
          case UnstableSlidePolicy::EscapeLower:
            add_event(EventKind::Escape, t, s);
            region = RegionLabel::Lower;
            break;
          case UnstableSlidePolicy::Hold:
            do_slide = true;
            break;
        }
        break;
      case ManifoldPointClass::Tangency: {
        if (incoming != RegionLabel::Manifold) {
          const Real s_in = incoming == RegionLabel::Upper ? b : a;
          if (std::abs(s_in) <= kClassifyTol) {
            // Grazing contact: the incoming field is tangent here and curves
            // back; continue in the region we came from, no event.
            region = incoming;
          } else {
            // Tangent on the far side: boundary of the sliding set.
            do_slide = true;
          }
        } else {
          const SlidingRoot r = sliding_lambda(sys, s, opts.tol_h);
          if (r.lambda_star) {
            do_slide = true;
          } else {
            const Real lead = std::abs(a) >= std::abs(b) ? a : b;
            region = lead > 0 ? RegionLabel::Upper : RegionLabel::Lower;
          }
        }
        break;
      }
    }

    if (!do_slide) {
      incoming = RegionLabel::Manifold;
      continue;
    }

    add_event(EventKind::SlideStart, t, s);
    std::vector<TrajectorySample> slide_samples;
    const SlideOutcome so = slide_leg(sys, s.x(), t, opts, slide_samples);
    append_samples(std::move(slide_samples));
    t = so.t;
    s = State(so.x, 0.0);
    switch (so.kind) {
      case SlideOutcome::Kind::Equilibrium:
        add_event(EventKind::EquilibriumReached, t, s);
        return traj;
      case SlideOutcome::Kind::Timeout:
        add_event(EventKind::Timeout, t, s);
        return traj;
      case SlideOutcome::Kind::Exit:
        add_event(EventKind::SlideExit, t, s);
        region = so.side > 0 ? RegionLabel::Upper : RegionLabel::Lower;
        incoming = RegionLabel::Manifold;
        break;
    }
  }
  throw std::runtime_error("integrate: leg budget exceeded (event cascade)");
}

}  // namespace filippov
