#include "welander/nonsmooth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "filippov/detail/roots.hpp"
#include "filippov/flow.hpp"
#include "filippov/rk45.hpp"
#include "filippov/sliding.hpp"

namespace welander {

namespace {

using filippov::EventKind;
using filippov::FlowOptions;
using filippov::FlowResult;
using filippov::FlowStop;
using filippov::ManifoldPointClass;
using filippov::RegionLabel;
using filippov::SectionSpec;

/// Exclusion band at the sliding-interval ends: a quadratic root that lands
/// this close to a boundary is the boundary itself up to roundoff (border
/// collision), not an interior pseudoequilibrium.
constexpr Real kEdgeTol = 1e-12;

void append_leg(Trajectory& traj, std::vector<filippov::TrajectorySample>&& v) {
  std::size_t first = 0;
  if (!traj.samples.empty() && !v.empty() && v.front().time == traj.samples.back().time)
    first = 1;
  traj.samples.insert(traj.samples.end(), std::make_move_iterator(v.begin() + first),
                      std::make_move_iterator(v.end()));
}

}  // namespace

Real pseudoeq_condition(Real x, const Params& p) {
  const Real quad = p.alpha - p.alpha * p.beta;
  const Real lin = p.beta - p.beta * p.epsilon - p.alpha + p.epsilon;
  return quad * x * x + lin * x - p.epsilon;
}

Real epsilon_of_pseudo_x(Real x, const Params& p) {
  const Real denom = 1.0 - (1.0 - p.beta) * x;
  if (std::abs(denom) < 1e-14)
    throw std::domain_error("epsilon_of_pseudo_x: pole at x = 1/(1 - beta)");
  return ((p.alpha - p.alpha * p.beta) * x * x + (p.beta - p.alpha) * x) / denom;
}

std::vector<PseudoEquilibrium> find_pseudoequilibria(const Params& p) {
  if (p.epsilon == 0.0)
    throw std::invalid_argument(
        "find_pseudoequilibria: sliding set degenerates at epsilon = 0");
  const PwsSystem sys = build_hard_switch(p);
  const auto bounds = filippov::sliding_region_bounds(sys);
  std::vector<PseudoEquilibrium> out;
  if (bounds.empty()) return out;

  // Roots of the sliding-flow equilibrium quadratic, in the stable form.
  const Real a = p.alpha - p.alpha * p.beta;
  const Real b = p.beta - p.beta * p.epsilon - p.alpha + p.epsilon;
  const Real c = -p.epsilon;
  const Real disc = b * b - 4 * a * c;
  if (disc < 0) return out;
  const Real q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
  std::vector<Real> roots;
  if (q != 0.0) {
    roots.push_back(q / a);
    roots.push_back(c / q);
  } else {
    roots.push_back(0.0);
  }
  std::sort(roots.begin(), roots.end());

  for (Real x : roots) {
    bool inside = false;
    for (const auto& iv : bounds)
      if (!iv.degenerate() && x > iv.lo + kEdgeTol && x < iv.hi - kEdgeTol) inside = true;
    if (!inside) continue;

    PseudoEquilibrium pe;
    pe.x = x;
    const filippov::SlidingRoot sr = filippov::sliding_lambda(sys, State(x, 0.0));
    pe.lambda_star =
        sr.lambda_star ? *sr.lambda_star : std::numeric_limits<Real>::quiet_NaN();
    pe.sliding_stability = filippov::sliding_stability_sign(sys, State(x, 0.0));
    // d/dx of the sliding flow 1 - (1 + lambda*(x)) x, with
    // dlambda*/dx = (alpha - alpha beta) / epsilon for the affine switch.
    pe.flow_derivative = -(1.0 + pe.lambda_star) - x * a / p.epsilon;
    if (std::abs(pe.flow_derivative) <= 1e-12)
      pe.classification = PseudoClass::Degenerate;
    else if ((pe.flow_derivative > 0) == (pe.sliding_stability > 0))
      pe.classification = PseudoClass::Pseudonode;
    else
      pe.classification = PseudoClass::Pseudosaddle;
    out.push_back(pe);
  }
  return out;
}

std::vector<BifurcationRecord> detect_border_collisions(const Params& base, Real eps_lo,
                                                        Real eps_hi) {
  if (!(eps_lo < eps_hi))
    throw std::invalid_argument("detect_border_collisions: empty epsilon range");
  std::vector<BifurcationRecord> out;
  constexpr int kGrid = 256;
  for (int k = 0; k <= 1; ++k) {
    auto height = [&base, k](Real e) {
      Params p = base;
      p.epsilon = e;
      return branch_equilibrium(k, p).location.y();
    };
    Real prev = height(eps_lo);
    for (int i = 1; i <= kGrid; ++i) {
      const Real e = eps_lo + (eps_hi - eps_lo) * i / kGrid;
      const Real cur = height(e);
      if ((prev > 0) != (cur > 0) || cur == 0.0 || prev == 0.0) {
        const Real e0 = eps_lo + (eps_hi - eps_lo) * (i - 1) / kGrid;
        const Real star = filippov::detail::bisect(height, e0, e, prev > 0, 1e-13);
        const bool dup = !out.empty() && out.back().branch == k &&
                         std::abs(out.back().epsilon - star) < 1e-10;
        if (!dup) {
          Params p = base;
          p.epsilon = star;
          out.push_back({BifurcationType::BorderCollision, star, k,
                         branch_equilibrium(k, p).location});
        }
      }
      prev = cur;
    }
  }
  std::sort(out.begin(), out.end(),
            [](const BifurcationRecord& l, const BifurcationRecord& r) {
              return l.epsilon < r.epsilon;
            });
  return out;
}

MapTurn map_turn(Real x, const Params& p, const MapOptions& opts) {
  const PwsSystem sys = build_hard_switch(p);
  const auto bounds = filippov::sliding_region_bounds(sys);
  if (bounds.size() != 1 || bounds.front().degenerate())
    throw std::domain_error("map_turn: no sliding interval, return map undefined");
  const Real lo = branch_equilibrium(1, p).location.x();
  const Real hi = bounds.front().lo;
  if (!(lo < hi) || !(x > lo && x < hi))
    throw std::domain_error("map_turn: x outside the open map domain");

  FlowOptions fo;
  fo.rel_tol = opts.rel_tol;
  fo.abs_tol = opts.abs_tol;
  fo.event_tol = opts.event_tol;
  fo.t_end = opts.t_max;
  SectionSpec up;
  up.g = sys.switching_fn;
  up.direction = +1;
  SectionSpec down;
  down.g = sys.switching_fn;
  down.direction = -1;

  MapTurn result;
  fo.label = RegionLabel::Lower;
  FlowResult leg1 = filippov::flow(sys.field_lower, State(x, 0.0), 0.0, fo, &up);
  if (leg1.stop != FlowStop::Section) throw NoReturnError(x);
  const State cross(leg1.s.x(), 0.0);
  if (filippov::classify_manifold_point(sys, cross) != ManifoldPointClass::Crossing)
    throw SlidingEncountered(cross.x(), "upward");
  result.x_cross = cross.x();

  fo.label = RegionLabel::Upper;
  FlowResult leg2 = filippov::flow(sys.field_upper, cross, leg1.t, fo, &down);
  if (leg2.stop != FlowStop::Section) throw NoReturnError(x);
  const State land(leg2.s.x(), 0.0);
  if (filippov::classify_manifold_point(sys, land) != ManifoldPointClass::Crossing)
    throw SlidingEncountered(land.x(), "downward");
  result.x_return = land.x();
  result.period = leg2.t;

  result.turn.samples = std::move(leg1.samples);
  result.turn.events.push_back({leg1.t, cross, EventKind::Crossing});
  append_leg(result.turn, std::move(leg2.samples));
  result.turn.events.push_back({leg2.t, land, EventKind::Crossing});
  return result;
}

Real return_map(Real x, const Params& p, const MapOptions& opts) {
  return map_turn(x, p, opts).x_return;
}

PeriodicOrbit find_periodic_orbit(const Params& p, const MapOptions& opts) {
  const PwsSystem sys = build_hard_switch(p);
  const auto bounds = filippov::sliding_region_bounds(sys);
  if (bounds.size() != 1 || bounds.front().degenerate())
    throw std::runtime_error("find_periodic_orbit: no sliding interval");
  const Real lo = branch_equilibrium(1, p).location.x();
  const Real hi = bounds.front().lo;
  if (!(lo < hi)) throw std::runtime_error("find_periodic_orbit: empty map domain");
  const Real margin = 1e-3 * (hi - lo);

  MapOptions mo = opts;
  mo.rel_tol = opts.rel_tol;
  auto G = [&](Real xx) { return return_map(xx, p, mo) - xx; };

  // Bracket R(x) - x: endpoints first, then a grid scan skipping any
  // launch whose turn fails (sliding hit, no return).
  Real bl = 0, br = 0, gl = 0, gr = 0;
  bool have = false;
  auto try_pair = [&](Real xa, Real xb) {
    Real ga, gb;
    try {
      ga = G(xa);
      gb = G(xb);
    } catch (const std::exception&) {
      return false;
    }
    if ((ga > 0) == (gb > 0)) return false;
    bl = xa;
    br = xb;
    gl = ga;
    gr = gb;
    return true;
  };
  have = try_pair(lo + margin, hi - margin);
  if (!have) {
    constexpr int kGrid = 17;
    Real xs[kGrid], gs[kGrid];
    bool ok[kGrid];
    for (int i = 0; i < kGrid; ++i) {
      xs[i] = lo + margin + (hi - lo - 2 * margin) * i / (kGrid - 1);
      try {
        gs[i] = G(xs[i]);
        ok[i] = true;
      } catch (const std::exception&) {
        ok[i] = false;
      }
    }
    for (int i = 0; i + 1 < kGrid && !have; ++i) {
      if (ok[i] && ok[i + 1] && (gs[i] > 0) != (gs[i + 1] > 0)) {
        bl = xs[i];
        br = xs[i + 1];
        gl = gs[i];
        gr = gs[i + 1];
        have = true;
      }
    }
  }
  if (!have)
    throw std::runtime_error("find_periodic_orbit: no sign change of R(x) - x in the domain");
  (void)gr;
  const Real xstar = filippov::detail::bisect(G, bl, br, gl > 0, opts.fp_tol);

  PeriodicOrbit orb;
  orb.section_x = xstar;
  MapTurn turn = map_turn(xstar, p, mo);
  orb.crossing_x = turn.x_cross;
  orb.period = turn.period;
  orb.residual = std::abs(turn.x_return - xstar);
  orb.orbit = std::move(turn.turn);
  const Real d = std::min({Real(1e-6), (xstar - lo) / 2, (hi - xstar) / 2});
  orb.multiplier = (return_map(xstar + d, p, mo) - return_map(xstar - d, p, mo)) / (2 * d);
  return orb;
}

HomoclinicCheck verify_homoclinic(Real delta, Real tol) {
  return verify_homoclinic_at(border_collisions(Params{}).epsilon_upper, delta, tol);
}

HomoclinicCheck verify_homoclinic_at(Real epsilon, Real delta, Real tol) {
  Params p;
  p.epsilon = epsilon;
  const PwsSystem sys = build_hard_switch(p);
  const State eq = branch_equilibrium(1, p).location;  // on the switch at the collision value

  HomoclinicCheck out;
  out.epsilon = p.epsilon;

  FlowOptions fo;
  fo.t_end = 200.0;
  fo.label = RegionLabel::Lower;
  SectionSpec up;
  up.g = sys.switching_fn;
  up.direction = +1;
  FlowResult leg1 =
      filippov::flow(sys.field_lower, State(eq.x(), eq.y() - delta), 0.0, fo, &up);
  out.loop.samples = std::move(leg1.samples);
  if (leg1.stop != FlowStop::Section) return out;
  out.crossing_x = leg1.s.x();
  out.loop.events.push_back({leg1.t, State(leg1.s.x(), 0.0), EventKind::Crossing});

  FlowOptions fh = fo;
  fh.label = RegionLabel::Upper;
  fh.stop_points = {eq};
  fh.stop_radius = tol / 2;
  SectionSpec down;
  down.g = sys.switching_fn;
  down.direction = -1;
  FlowResult leg2 =
      filippov::flow(sys.field_upper, State(leg1.s.x(), 0.0), leg1.t, fh, &down);
  append_leg(out.loop, std::move(leg2.samples));
  out.return_distance = (leg2.s - eq).norm();
  out.verified = leg2.stop == FlowStop::Point;
  if (out.verified)
    out.loop.events.push_back({leg2.t, leg2.s, EventKind::EquilibriumReached});
  return out;
}

std::vector<HomoclinicMember> homoclinic_family(const std::vector<Real>& slide_times,
                                                Real tol, const MapOptions& opts) {
  Params p;
  p.epsilon = border_collisions(p).epsilon_upper;
  const PwsSystem sys = build_hard_switch(p);
  const State eq = branch_equilibrium(1, p).location;
  const auto bounds = filippov::sliding_region_bounds(sys);
  if (bounds.size() != 1 || bounds.front().degenerate())
    throw std::runtime_error("homoclinic_family: unexpected sliding geometry");
  const Real cap = bounds.front().hi - opts.slide_cap_margin;
  const Real x0 = eq.x() + opts.launch_offset;

  // Clamped combination parameter: trial stages may probe past the boundary
  // root, where the raw lambda leaves [0, 1].
  auto lambda_clamped = [&sys](Real x) {
    const auto r = filippov::sliding_lambda(sys, State(x, 0.0));
    if (r.lambda_star) return *r.lambda_star;
    const State s(x, 0.0);
    const Real s0v = sys.field_lower(s).dot(sys.grad_h(s));
    const Real s1v = sys.field_upper(s).dot(sys.grad_h(s));
    return std::abs(s0v) <= std::abs(s1v) ? 0.0 : 1.0;
  };
  auto slide_to = [&](Real tau) -> Real {
    auto rhs = [&](const filippov::VecN<1>& xv) {
      filippov::VecN<1> dx;
      dx[0] = filippov::eval_field(sys, State(xv[0], 0.0), lambda_clamped(xv[0])).x();
      return dx;
    };
    filippov::VecN<1> y0;
    y0[0] = x0;
    filippov::Dopri5<1, decltype(rhs)> ode(rhs, 0.0, y0,
                                           {opts.rel_tol, opts.abs_tol, 0.25});
    while (tau - ode.t() > 1e-13 * std::max(Real(1), tau)) {
      const auto& st = ode.advance(tau - ode.t());
      if (ode.y()[0] >= cap) {
        if (st.y0[0] >= cap) return cap;
        auto g = [&](Real th) { return st.eval(th)[0] - cap; };
        const Real th = filippov::detail::brent(g, 0.0, 1.0, g(0.0), g(1.0), 1e-15, 0.0);
        return st.eval(th)[0];
      }
    }
    return ode.y()[0];
  };

  auto run_member = [&](Real tau, bool up) {
    HomoclinicMember m;
    m.slide_time = tau;
    m.escape_up = up;
    m.detach_x = slide_to(tau);

    FlowOptions fo;
    fo.rel_tol = opts.rel_tol;
    fo.abs_tol = opts.abs_tol;
    fo.event_tol = opts.event_tol;
    fo.t_end = opts.t_max;
    fo.record = false;  // verification needs no samples
    SectionSpec any;
    any.g = sys.switching_fn;
    any.direction = 0;

    FlowOptions fh = fo;
    fh.stop_points = {eq};
    fh.stop_radius = tol / 2;

    if (up) {
      const FlowResult leg = filippov::flow(sys.field_upper, State(m.detach_x, 0.0), 0.0,
                                            fh, &any);
      m.crossings = leg.crossings_seen;
      m.return_distance = (leg.s - eq).norm();
      m.verified = leg.stop == FlowStop::Point && leg.crossings_seen == 0;
    } else {
      SectionSpec upward;
      upward.g = sys.switching_fn;
      upward.direction = +1;
      const FlowResult ex = filippov::flow(sys.field_lower, State(m.detach_x, 0.0), 0.0,
                                           fo, &upward);
      if (ex.stop != FlowStop::Section) {
        m.return_distance = std::numeric_limits<Real>::infinity();
        return m;
      }
      const FlowResult leg = filippov::flow(sys.field_upper, State(ex.s.x(), 0.0), ex.t,
                                            fh, &any);
      m.crossings = ex.crossings_seen + leg.crossings_seen;
      m.return_distance = (leg.s - eq).norm();
      m.verified = leg.stop == FlowStop::Point && ex.crossings_seen == 1 &&
                   leg.crossings_seen == 0;
    }
    return m;
  };

  std::vector<HomoclinicMember> out;
  out.reserve(2 * slide_times.size());
  for (Real tau : slide_times) {
    out.push_back(run_member(tau, true));
    out.push_back(run_member(tau, false));
  }
  return out;
}

FusedFocusCheck fused_focus_check(Real probe) {
  FusedFocusCheck out;
  Params p;
  p.epsilon = 0.0;
  const PwsSystem sys = build_hard_switch(p);
  const auto bounds = filippov::sliding_region_bounds(sys);
  out.degenerate_at_zero = bounds.size() == 1 && bounds.front().degenerate();
  if (!out.degenerate_at_zero) return out;
  out.fused_x = bounds.front().lo;

  filippov::IntegratorOptions io;
  io.t_max = 400.0;
  // The fused point attracts only algebraically (the graze-to-graze turn map
  // contracts at second order), and once the crossing abscissae sit closer
  // than the integrator's dense-output scan can resolve a graze arc, a
  // return crossing would be stepped over.  Arcs shrink through that
  // threshold near 7e-5, so stop comfortably above it: each post-crossing
  // restart latches as soon as the abscissa is inside this radius.
  io.equilibrium_radius = 2e-4;
  io.known_equilibria = known_equilibria(p);
  const Trajectory spiral = filippov::integrate(sys, State(0.9, 0.2), io);
  out.spiral_converges =
      spiral.terminated_by(EventKind::EquilibriumReached) &&
      (spiral.back().state - State(out.fused_x, 0.0)).norm() < 1e-3;

  out.probe_epsilon = std::min(probe, std::abs(border_collisions(p).epsilon_upper) / 2);

  {
    Params pm = p;
    pm.epsilon = -out.probe_epsilon;
    try {
      const PeriodicOrbit orb = find_periodic_orbit(pm);
      out.orbit_below = std::abs(orb.multiplier) < 1.0 && orb.residual < 1e-8;
    } catch (const std::exception&) {
      out.orbit_below = false;
    }
  }
  {
    Params pp = p;
    pp.epsilon = out.probe_epsilon;
    const auto pseudos = find_pseudoequilibria(pp);
    if (pseudos.size() == 1 && pseudos.front().stable()) {
      filippov::IntegratorOptions io2;
      io2.t_max = 400.0;
      io2.known_equilibria = known_equilibria(pp);
      const Trajectory t2 = filippov::integrate(build_hard_switch(pp), State(0.9, 0.2), io2);
      out.pseudo_above = t2.terminated_by(EventKind::EquilibriumReached) &&
                         std::abs(t2.back().state.x() - pseudos.front().x) < 1e-5;
    }
  }
  return out;
}

std::vector<State> known_equilibria(const Params& p) {
  std::vector<State> out;
  for (int k = 0; k <= 1; ++k) {
    const EquilibriumInfo eq = branch_equilibrium(k, p);
    if (!eq.is_virtual) out.push_back(eq.location);
  }
  if (p.epsilon == 0.0) {
    const auto bounds = filippov::sliding_region_bounds(build_hard_switch(p));
    if (bounds.size() == 1 && bounds.front().degenerate())
      out.push_back(State(bounds.front().lo, 0.0));
  } else {
    for (const auto& pe : find_pseudoequilibria(p)) out.push_back(State(pe.x, 0.0));
  }
  return out;
}

DiagramResult bifurcation_diagram(Real eps_lo, Real eps_hi, int n, int threads) {
  if (n < 2) throw std::invalid_argument("bifurcation_diagram: need at least 2 samples");
  if (!(eps_lo < eps_hi)) throw std::invalid_argument("bifurcation_diagram: empty range");

  const BorderCollisions bc = border_collisions(Params{});
  struct Slot {
    DiagramRow row;
    std::string error;
    bool ok = false;
  };
  std::vector<Slot> slots(n);

  auto compute = [&](int i) {
    // Samples landing within rounding distance of a regime boundary (zero or
    // a collision value) are classified as the boundary itself: below 1e-9
    // the regimes are not numerically distinguishable, and near a collision
    // the pseudoequilibrium root falls into the interval's edge-exclusion
    // band and would be rejected.
    Real e = eps_lo + (eps_hi - eps_lo) * i / (n - 1);
    if (std::abs(e) <= 1e-9) e = 0.0;
    const bool at_upper = std::abs(e - bc.epsilon_upper) <= 1e-9;
    const bool at_lower = std::abs(e - bc.epsilon_lower) <= 1e-9;
    Params p;
    p.epsilon = e;
    DiagramRow row;
    row.epsilon = e;
    if (e <= bc.epsilon_upper || at_upper) {
      row.attractor = AttractorKind::Equilibrium;
      row.x_left = row.x_right = branch_equilibrium(1, p).location.x();
    } else if (e < 0.0) {
      const PeriodicOrbit orb = find_periodic_orbit(p);
      row.attractor = AttractorKind::PeriodicOrbit;
      row.x_left = orb.section_x;
      row.x_right = orb.crossing_x;
    } else if (e == 0.0) {
      const auto b = filippov::sliding_region_bounds(build_hard_switch(p));
      row.attractor = AttractorKind::Pseudoequilibrium;
      row.x_left = row.x_right = b.empty() ? 0.75 : b.front().lo;
    } else if (e < bc.epsilon_lower && !at_lower) {
      const auto pseudos = find_pseudoequilibria(p);
      const PseudoEquilibrium* node = nullptr;
      for (const auto& pe : pseudos)
        if (pe.stable()) node = &pe;
      if (node == nullptr)
        throw std::runtime_error("no stable pseudoequilibrium in the sliding regime");
      row.attractor = AttractorKind::Pseudoequilibrium;
      row.x_left = row.x_right = node->x;
    } else {
      row.attractor = AttractorKind::Equilibrium;
      row.x_left = row.x_right = branch_equilibrium(0, p).location.x();
    }
    row.amplitude = row.x_right - row.x_left;
    slots[i].row = row;
    slots[i].ok = true;
  };

  int workers = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  if (workers <= 0) workers = 4;
  workers = std::min(workers, n);

  auto work = [&](int w) {
    for (int i = w; i < n; i += workers) {
      try {
        compute(i);
      } catch (const std::exception& ex) {
        slots[i].error = ex.what();
      }
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& th : pool) th.join();
  }

  DiagramResult out;
  out.rows.reserve(n);
  for (int i = 0; i < n; ++i) {
    if (!slots[i].ok) {
      const Real e = eps_lo + (eps_hi - eps_lo) * i / (n - 1);
      out.error = "epsilon = " + std::to_string(e) + ": " + slots[i].error;
      break;
    }
    out.rows.push_back(slots[i].row);
  }
  out.valid_prefix = out.rows.size();
  return out;
}

const char* to_string(PseudoClass c) {
  switch (c) {
    case PseudoClass::Pseudonode: return "pseudonode";
    case PseudoClass::Pseudosaddle: return "pseudosaddle";
    case PseudoClass::Degenerate: return "degenerate";
  }
  return "?";
}

const char* to_string(AttractorKind k) {
  switch (k) {
    case AttractorKind::Equilibrium: return "equilibrium";
    case AttractorKind::Pseudoequilibrium: return "pseudoequilibrium";
    case AttractorKind::PeriodicOrbit: return "periodic_orbit";
  }
  return "?";
}

}  // namespace welander
