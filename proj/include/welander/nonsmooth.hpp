#pragma once

// Bifurcation toolkit for the hard-switch model: pseudoequilibria of the
// sliding flow, border collisions of the branch equilibria, the manifold
// return map with its periodic orbits, the homoclinic connection at the
// upper collision value, and the one-parameter attractor diagram.

#include <stdexcept>
#include <string>
#include <vector>

#include "filippov/integrator.hpp"
#include "welander/model.hpp"

namespace welander {

using filippov::Trajectory;

enum class PseudoClass : std::uint8_t {
  Pseudonode,    ///< sliding flow and transversal dynamics agree in sign
  Pseudosaddle,  ///< attracting along the manifold, repelling across (or vice versa)
  Degenerate,    ///< sliding-flow derivative vanishes within tolerance
};

struct PseudoEquilibrium {
  Real x = 0;
  Real lambda_star = 0;
  Real flow_derivative = 0;    ///< d/dx of the sliding flow at x
  Real sliding_stability = 0;  ///< dS/dlambda on the manifold (-epsilon here)
  PseudoClass classification = PseudoClass::Degenerate;

  /// Attracts from both the manifold and the surrounding plane.
  [[nodiscard]] bool stable() const {
    return classification == PseudoClass::Pseudonode && flow_derivative < 0 &&
           sliding_stability < 0;
  }
};

/// Residual whose roots in x are the equilibria of the sliding flow.  For
/// the canonical transport ratios it is the quadratic 4x^2 + (5e-3)x - 10e
/// (scaled by 1/10).
[[nodiscard]] Real pseudoeq_condition(Real x, const Params& p);

/// epsilon that makes x a sliding-flow equilibrium (exact inverse of the
/// condition above).  Throws std::domain_error at the pole x = 1/(1-beta).
[[nodiscard]] Real epsilon_of_pseudo_x(Real x, const Params& p = {});

/// All pseudoequilibria strictly inside the sliding interval, ascending in
/// x.  Throws std::invalid_argument at epsilon = 0, where the sliding set
/// degenerates to a point and the combination parameter is undefined.
[[nodiscard]] std::vector<PseudoEquilibrium> find_pseudoequilibria(const Params& p);

enum class BifurcationType : std::uint8_t { BorderCollision, HomoclinicExplosion };

struct BifurcationRecord {
  BifurcationType type = BifurcationType::BorderCollision;
  Real epsilon = 0;
  int branch = -1;  ///< colliding frozen branch, when applicable
  State where = State::Zero();
};

/// Numerically locate the epsilon values where a branch equilibrium lands on
/// the switch, by scanning and bisecting its height y(epsilon).  Exact
/// counterpart: border_collisions().
[[nodiscard]] std::vector<BifurcationRecord> detect_border_collisions(const Params& base,
                                                                      Real eps_lo = -1.0,
                                                                      Real eps_hi = 1.0);

struct MapOptions {
  Real t_max = 200.0;  ///< absolute time budget per map turn
  Real rel_tol = 1e-10;
  Real abs_tol = 1e-12;
  Real event_tol = 1e-12;
  Real fp_tol = 1e-10;           ///< fixed-point bisection width
  Real launch_offset = 1e-6;     ///< initial gap from the colliding equilibrium
  Real slide_cap_margin = 1e-3;  ///< keep slides away from the boundary root
};

/// A return-map leg attached to the sliding set instead of crossing.
class SlidingEncountered : public std::runtime_error {
 public:
  SlidingEncountered(Real x, const char* leg)
      : std::runtime_error(std::string("return map leg (") + leg +
                           ") hit the sliding set at x = " + std::to_string(x)),
        x_(x) {}
  [[nodiscard]] Real x() const { return x_; }

 private:
  Real x_;
};

/// The flow exhausted its time budget without coming back to the section.
class NoReturnError : public std::runtime_error {
 public:
  explicit NoReturnError(Real x)
      : std::runtime_error("return map did not close from x = " + std::to_string(x)) {}
};

/// One full turn of the manifold return map, launched at (x, 0): down into
/// the convection-off region, first upward crossing, then the convection-on
/// region until the next downward crossing.
struct MapTurn {
  Real x_return = 0;  ///< landing abscissa R(x)
  Real x_cross = 0;   ///< abscissa of the intermediate upward crossing
  Real period = 0;    ///< total turn time
  Trajectory turn;    ///< both legs, crossing events included
};
[[nodiscard]] MapTurn map_turn(Real x, const Params& p, const MapOptions& opts = {});

/// R(x) alone.  Throws std::domain_error outside the map's domain (the open
/// interval between the collided abscissa and the sliding set), and the
/// exceptions above when a turn fails.
[[nodiscard]] Real return_map(Real x, const Params& p, const MapOptions& opts = {});

struct PeriodicOrbit {
  Real section_x = 0;   ///< fixed point of the return map (downward crossing)
  Real crossing_x = 0;  ///< companion upward crossing of the same turn
  Real period = 0;
  Real multiplier = 0;  ///< dR/dx at the fixed point, central difference
  Real residual = 0;    ///< |R(x*) - x*|
  Trajectory orbit;     ///< one turn launched at the fixed point
};

/// Locate the crossing periodic orbit by bisecting R(x) - x.  Throws
/// std::runtime_error when no sign change exists in the map's domain.
[[nodiscard]] PeriodicOrbit find_periodic_orbit(const Params& p, const MapOptions& opts = {});

/// Check the connection at the upper collision value: a trajectory released
/// delta below the collided equilibrium must cross the switch exactly once
/// (at x = 7/9 in the vanishing-delta limit) and return to the equilibrium
/// without crossing again.
struct HomoclinicCheck {
  bool verified = false;
  Real epsilon = 0;          ///< collision value used
  Real crossing_x = 0;       ///< abscissa of the single upward crossing
  Real return_distance = 0;  ///< final gap to the collided equilibrium
  Trajectory loop;
};
[[nodiscard]] HomoclinicCheck verify_homoclinic(Real delta = 1e-8, Real tol = 1e-5);

/// Same protocol at an arbitrary epsilon (diagnostic): away from the
/// collision value the loop cannot close, so verified stays false and
/// return_distance is bounded away from zero.
[[nodiscard]] HomoclinicCheck verify_homoclinic_at(Real epsilon, Real delta = 1e-8,
                                                   Real tol = 1e-5);

/// One member of the connection family at the collision value: slide along
/// the repelling segment for slide_time, detach up or down, and return to
/// the collided equilibrium.  Up-escapes return directly (no crossing);
/// down-escapes make one excursion through the convection-off region.
struct HomoclinicMember {
  Real slide_time = 0;
  bool escape_up = false;
  Real detach_x = 0;         ///< where the slide actually ended (cap applies)
  int crossings = 0;         ///< switch crossings after detaching
  Real return_distance = 0;
  bool verified = false;
};

/// Two members (up and down escape) per requested slide time, in input
/// order.  tol bounds the accepted return distance.
[[nodiscard]] std::vector<HomoclinicMember> homoclinic_family(
    const std::vector<Real>& slide_times, Real tol = 1e-4, const MapOptions& opts = {});

/// Behavior at epsilon = 0, where the two sliding boundaries fuse: the
/// sliding set collapses to the point x = 3/4, trajectories spiral into it,
/// and the attractor changes character across epsilon = 0.
struct FusedFocusCheck {
  bool degenerate_at_zero = false;  ///< sliding set collapsed to one point
  Real fused_x = 0;                 ///< its abscissa
  bool spiral_converges = false;    ///< a crossing trajectory reaches it
  Real probe_epsilon = 0;           ///< magnitude used for the side probes
  bool orbit_below = false;         ///< -probe: stable crossing orbit exists
  bool pseudo_above = false;        ///< +probe: stable pseudonode attracts
};
[[nodiscard]] FusedFocusCheck fused_focus_check(Real probe = 0.01);

/// Stop points for the hybrid integrator at this epsilon: the real branch
/// equilibria plus every pseudoequilibrium (and the fused point at eps = 0).
[[nodiscard]] std::vector<State> known_equilibria(const Params& p);

enum class AttractorKind : std::uint8_t { Equilibrium, Pseudoequilibrium, PeriodicOrbit };

struct DiagramRow {
  Real epsilon = 0;
  AttractorKind attractor = AttractorKind::Equilibrium;
  Real x_left = 0;   ///< attractor abscissa; for orbits, the downward crossing
  Real x_right = 0;  ///< equal to x_left except for orbits (upward crossing)
  Real amplitude = 0;
};

struct DiagramResult {
  std::vector<DiagramRow> rows;   ///< the rows that were computed successfully
  std::string error;              ///< empty when the sweep completed
  std::size_t valid_prefix = 0;   ///< rows[0..valid_prefix) are trustworthy
};

/// Attractor sweep over [eps_lo, eps_hi] with n samples (n >= 2), computed
/// on `threads` workers (0 = hardware concurrency).  On a row failure the
/// result carries the completed prefix plus the error message.
[[nodiscard]] DiagramResult bifurcation_diagram(Real eps_lo, Real eps_hi, int n,
                                                int threads = 0);

const char* to_string(PseudoClass c);
const char* to_string(AttractorKind k);

}  // namespace welander
