#include "filippov/flow.hpp"

#include <algorithm>
#include <cmath>

#include "filippov/detail/roots.hpp"

namespace filippov {

namespace {

/// Sign with a dead band: 0 when |g| <= tol ("on the section").
int sgn_tol(Real g, Real tol) {
  if (std::abs(g) <= tol) return 0;
  return g > 0 ? 1 : -1;
}

}  // namespace

FlowResult flow(const VectorField& f, const State& s0, Real t0, const FlowOptions& opts,
                const SectionSpec* section) {
  FlowResult out;
  out.t = t0;
  out.s = s0;

  auto push_sample = [&](Real t, const State& s) {
    if (opts.record) out.samples.push_back({t, s, opts.label});
  };
  push_sample(t0, s0);

  for (std::size_t i = 0; i < opts.stop_points.size(); ++i) {
    if ((s0 - opts.stop_points[i]).norm() <= opts.stop_radius) {
      out.stop = FlowStop::Point;
      out.point_index = static_cast<int>(i);
      return out;
    }
  }

  auto rhs = [&f](const VecN<2>& y) -> VecN<2> { return f(State(y)); };
  Dopri5<2, decltype(rhs)> ode(rhs, t0, s0, {opts.rel_tol, opts.abs_tol, opts.max_step});

  // A crossing is registered only against the last sign seen strictly outside
  // the tolerance band, so a flow launched on the section does not retrigger
  // at its own start point.
  int last_strict = section ? sgn_tol(section->g(s0), opts.event_tol) : 0;

  std::vector<char> prev_in(opts.stop_points.size(), 0);
  constexpr int kScan = 8;  // dense-output subdivisions searched per step

  while (true) {
    Real h_cap = opts.t_end - ode.t();
    if (h_cap <= 1e-13 * std::max(Real(1), std::abs(opts.t_end))) {
      out.stop = FlowStop::Time;
      out.t = ode.t();
      out.s = ode.y();
      return out;
    }
    if (opts.step_cap) h_cap = std::min(h_cap, opts.step_cap(State(ode.y())));
    const DenseStep<2>& step = ode.advance(h_cap);

    if (section) {
      Real theta_ref = 0.0;
      for (int j = 1; j <= kScan; ++j) {
        const Real theta = static_cast<Real>(j) / kScan;
        const Real gj = section->g(State(step.eval(theta)));
        const int sgn_j = sgn_tol(gj, opts.event_tol);
        if (sgn_j == 0) continue;  // in the band; keep the previous bracket end
        if (last_strict != 0 && sgn_j != last_strict) {
          const int dir = sgn_j;  // sign of g after the crossing
          if (section->direction == 0 || dir == section->direction) {
            ++out.crossings_seen;
            if (out.crossings_seen > section->skip) {
              auto g_of = [&](Real th) { return section->g(State(step.eval(th))); };
              const Real g_ref = g_of(theta_ref);
              // If the bracket's left end already sits in the band (the
              // previous step ended on the section), stop right there.
              const Real theta_star =
                  std::abs(g_ref) <= opts.event_tol
                      ? theta_ref
                      : detail::brent(g_of, theta_ref, theta, g_ref, gj, 1e-15,
                                      opts.event_tol);
              out.stop = FlowStop::Section;
              out.t = step.t0 + theta_star * step.h;
              out.s = step.eval(theta_star);
              out.direction = dir;
              push_sample(out.t, out.s);
              return out;
            }
          }
        }
        last_strict = sgn_j;
        theta_ref = theta;
      }
    }

    push_sample(ode.t(), ode.y());

    for (std::size_t i = 0; i < opts.stop_points.size(); ++i) {
      const bool in_now = (State(ode.y()) - opts.stop_points[i]).norm() <= opts.stop_radius;
      if (in_now && prev_in[i]) {  // held through one full accepted step
        out.stop = FlowStop::Point;
        out.t = ode.t();
        out.s = ode.y();
        out.point_index = static_cast<int>(i);
        return out;
      }
      prev_in[i] = in_now ? 1 : 0;
    }
  }
}

}  // namespace filippov
