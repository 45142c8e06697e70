#pragma once

// Smoothed-switch companion toolkit: equilibrium continuation through the
// boundary layer, trace-zero (Hopf) detection, the upward Poincare map on
// {y = 0}, periodic-orbit counting, and the fold of periodic orbits that
// converges to the hard-switch explosion value as the layer shrinks.

#include <vector>

#include "welander/model.hpp"

namespace welander {

struct SmoothOptions {
  Real newton_tol = 1e-12;
  int newton_max_iter = 50;
  Real rel_tol = 1e-10;
  Real abs_tol = 1e-12;
  Real event_tol = 1e-12;
  Real t_max = 300.0;      ///< time budget per Poincare return
  int hopf_grid = 240;     ///< epsilon samples per trace-zero scan
  int section_grid = 44;   ///< uniform section samples per orbit count
  Real section_lo = 0.45;  ///< section window searched for orbit crossings
  Real section_hi = 1.15;
  Real fp_tol = 1e-10;       ///< fixed-point bisection width on the section
  Real orbit_dedupe = 1e-7;  ///< section gap below which two roots are one orbit
  Real snpo_tol = 1e-8;      ///< epsilon bisection width for the orbit fold
};

struct SmoothEquilibrium {
  State location = State::Zero();
  Jacobian jacobian = Jacobian::Zero();
  Real trace = 0;
  Real det = 0;
  bool stable = false;  ///< trace < 0 and det > 0
};

/// The equilibrium of the smoothed system: the x-nullcline gives
/// x = 1/(1 + k(y)), the remaining scalar equation in y is solved by a
/// layer-aware scan plus bracketed root finding, then polished by a damped
/// planar Newton iteration.  With several roots, the one continuing the
/// hard-switch attractor (branch equilibrium or layer equilibrium at
/// k = lambda*) is returned.
[[nodiscard]] SmoothEquilibrium smooth_equilibrium(const Params& p, Real a,
                                                   const SmoothOptions& opts = {});

struct HopfPoint {
  Real epsilon = 0;
  State location = State::Zero();
  Real omega = 0;  ///< sqrt(det) at the trace zero: rotation rate of the pair
};

/// Zeros of the equilibrium's Jacobian trace over [eps_lo, eps_hi] with
/// det > 0 (a conjugate pair crossing the imaginary axis).
[[nodiscard]] std::vector<HopfPoint> hopf_scan(const Params& base, Real a, Real eps_lo,
                                               Real eps_hi, const SmoothOptions& opts = {});

/// First upward return to {y = 0} from (x, 0).  Throws std::domain_error
/// when the section is not crossed transversally upward at x, and
/// std::runtime_error when the flow settles into the equilibrium or runs
/// out of time instead of returning.
[[nodiscard]] Real smooth_return_map(Real x, const Params& p, Real a,
                                     const SmoothOptions& opts = {});

struct SmoothOrbit {
  Real epsilon = 0;
  Real a = 0;
  Real section_x = 0;   ///< upward-crossing fixed point of the return map
  Real period = 0;
  Real multiplier = 0;  ///< dR/dx there, central difference
  bool stable = false;
};

/// All periodic orbits crossing the section window, ascending in section_x.
/// Sub-grid orbit pairs are caught by refining the interior extrema of
/// R(x) - x (golden section) before bisecting.
[[nodiscard]] std::vector<SmoothOrbit> find_smooth_orbits(const Params& p, Real a,
                                                          const SmoothOptions& opts = {});

/// Fold of periodic orbits: bisect epsilon on the predicate "at least one
/// orbit exists" down to snpo_tol.  Requires a validated bracket: at least
/// one orbit at eps_hi and none at eps_lo, else std::invalid_argument.
[[nodiscard]] Real snpo_locate(Real a, Real eps_lo, Real eps_hi,
                               const SmoothOptions& opts = {});

struct LimitStudyRow {
  Real a = 0;
  Real eps_hopf = 0;
  Real eps_snpo = 0;
  Real gap = 0;  ///< eps_hopf - eps_snpo (> 0: the fold precedes the crossing)
};

/// For each layer width: locate the single subcritical trace zero near the
/// hard-switch explosion value, probe a bracket below it for the orbit
/// fold, and pin the fold.  Both values approach the explosion value as the
/// layer shrinks.
[[nodiscard]] std::vector<LimitStudyRow> limit_study(const std::vector<Real>& widths,
                                                     const SmoothOptions& opts = {});

}  // namespace welander
