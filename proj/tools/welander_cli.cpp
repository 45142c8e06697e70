// Command-line front end for the convection-switch toolkit: run single
// simulations, sweep the attractor diagram, and emit bifurcation reports as
// plain CSV/JSON.  Exit codes: 0 ok, 1 usage/validation, 2 numeric failure,
// 3 ran but the requested verification did not hold.

#include <algorithm>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "filippov/integrator.hpp"
#include "welander/model.hpp"
#include "welander/nonsmooth.hpp"
#include "welander/smooth.hpp"

namespace {

using json = nlohmann::ordered_json;
using filippov::State;
using welander::Params;
using welander::Real;

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kNumeric = 2;
constexpr int kUnverified = 3;

std::string fmt(Real v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string join(const std::vector<Real>& vs) {
  std::string out;
  for (std::size_t i = 0; i < vs.size(); ++i) {
    if (i) out += ",";
    out += fmt(vs[i]);
  }
  return out;
}

/// Config echo, sorted by key so identical configs give identical bytes.
using Config = std::map<std::string, std::string>;

void echo_config(std::ostream& os, const Config& cfg) {
  for (const auto& [k, v] : cfg) os << "# " << k << "=" << v << "\n";
}

json config_json(const Config& cfg) {
  json j = json::object();
  for (const auto& [k, v] : cfg) j[k] = v;
  return j;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::invalid_argument("cannot open output file: " + path);
  return os;
}

json event_json(const filippov::Event& e) {
  json j = json::object();
  j["t"] = e.time;
  j["kind"] = filippov::to_string(e.kind);
  j["x"] = e.state.x();
  j["y"] = e.state.y();
  return j;
}

// ------------------------------------------------------------------ simulate

struct SimulateArgs {
  std::string model;
  Real epsilon = 0;
  Real a = 0;
  bool a_given = false;
  Real alpha = 0.8;
  Real beta = 0.5;
  Real x0 = 0;
  Real y0 = 0;
  Real t_max = 100.0;
  Real rel_tol = 1e-10;
  Real abs_tol = 1e-12;
  Real event_tol = 1e-12;
  std::string policy = "escape-lower";
  std::string format = "csv";
  std::string out = "trajectory.csv";
};

filippov::UnstableSlidePolicy parse_policy(const std::string& name) {
  if (name == "escape-lower") return filippov::UnstableSlidePolicy::EscapeLower;
  if (name == "escape-upper") return filippov::UnstableSlidePolicy::EscapeUpper;
  if (name == "hold") return filippov::UnstableSlidePolicy::Hold;
  throw std::invalid_argument("unknown policy: " + name);
}

int run_simulate(const SimulateArgs& args) {
  const bool smooth = args.model == "smooth";
  if (smooth && (!args.a_given || !(args.a > 0)))
    throw std::invalid_argument("smooth model requires --a > 0");

  Config cfg;
  cfg["command"] = "simulate";
  cfg["model"] = args.model;
  cfg["epsilon"] = fmt(args.epsilon);
  cfg["alpha"] = fmt(args.alpha);
  cfg["beta"] = fmt(args.beta);
  cfg["x0"] = fmt(args.x0);
  cfg["y0"] = fmt(args.y0);
  cfg["t_max"] = fmt(args.t_max);
  cfg["rel_tol"] = fmt(args.rel_tol);
  cfg["abs_tol"] = fmt(args.abs_tol);
  cfg["event_tol"] = fmt(args.event_tol);
  cfg["format"] = args.format;
  cfg["out"] = args.out;
  if (smooth)
    cfg["a"] = fmt(args.a);
  else
    cfg["policy"] = args.policy;

  const Params p{args.alpha, args.beta, args.epsilon};
  filippov::Trajectory traj;
  if (smooth) {
    const welander::SmoothSystem sys = welander::build_smooth_switch(p, args.a);
    filippov::FlowOptions fo;
    fo.rel_tol = args.rel_tol;
    fo.abs_tol = args.abs_tol;
    fo.event_tol = args.event_tol;
    fo.t_end = args.t_max;
    const Real zone = 60 * args.a;
    const Real cap = 12 * args.a;
    fo.step_cap = [zone, cap](const State& s) {
      return std::abs(s.y()) < zone ? cap : std::numeric_limits<Real>::infinity();
    };
    filippov::FlowResult r = filippov::flow(sys.field, State(args.x0, args.y0), 0.0, fo);
    traj.samples = std::move(r.samples);
    for (auto& s : traj.samples)
      s.region = s.state.y() > 0   ? filippov::RegionLabel::Upper
                 : s.state.y() < 0 ? filippov::RegionLabel::Lower
                                   : filippov::RegionLabel::Manifold;
    traj.events.push_back({r.t, r.s, filippov::EventKind::Timeout});
  } else {
    const filippov::PwsSystem sys = welander::build_hard_switch(p);
    filippov::IntegratorOptions io;
    io.rel_tol = args.rel_tol;
    io.abs_tol = args.abs_tol;
    io.event_tol = args.event_tol;
    io.t_max = args.t_max;
    io.unstable_slide_policy = parse_policy(args.policy);
    io.known_equilibria = welander::known_equilibria(p);
    traj = filippov::integrate(sys, State(args.x0, args.y0), io);
  }

  if (args.format == "csv") {
    std::ofstream os = open_out(args.out);
    echo_config(os, cfg);
    os << "t,x,y,region\n";
    for (const auto& s : traj.samples)
      os << fmt(s.time) << "," << fmt(s.state.x()) << "," << fmt(s.state.y()) << ","
         << filippov::to_string(s.region) << "\n";
    std::ofstream es = open_out(args.out + ".events.jsonl");
    for (const auto& e : traj.events) es << event_json(e).dump() << "\n";
  } else {
    json j;
    j["config"] = config_json(cfg);
    j["samples"] = json::array();
    for (const auto& s : traj.samples)
      j["samples"].push_back({s.time, s.state.x(), s.state.y(), filippov::to_string(s.region)});
    j["events"] = json::array();
    for (const auto& e : traj.events) j["events"].push_back(event_json(e));
    open_out(args.out) << j.dump(2) << "\n";
  }
  return kOk;
}

// ------------------------------------------------------------------- diagram

struct DiagramArgs {
  Real lo = 0;
  Real hi = 0;
  int n = 0;
  int threads = 0;
  std::string out = "diagram.csv";
};

int run_diagram(const DiagramArgs& args) {
  if (!(args.lo < args.hi)) throw std::invalid_argument("--lo must be strictly below --hi");
  if (args.n < 2) throw std::invalid_argument("--n must be at least 2");

  Config cfg;
  cfg["command"] = "diagram";
  cfg["lo"] = fmt(args.lo);
  cfg["hi"] = fmt(args.hi);
  cfg["n"] = std::to_string(args.n);
  cfg["threads"] = std::to_string(args.threads);
  cfg["out"] = args.out;

  const welander::DiagramResult res =
      welander::bifurcation_diagram(args.lo, args.hi, args.n, args.threads);

  std::ofstream os = open_out(args.out);
  echo_config(os, cfg);
  os << "epsilon,attractor,x_left,x_right,amplitude\n";
  for (const auto& r : res.rows)
    os << fmt(r.epsilon) << "," << welander::to_string(r.attractor) << "," << fmt(r.x_left)
       << "," << fmt(r.x_right) << "," << fmt(r.amplitude) << "\n";
  if (!res.error.empty()) {
    os << "# INCOMPLETE " << res.error << "\n";
    std::cerr << "diagram stopped early: " << res.error << "\n";
    return kNumeric;
  }
  return kOk;
}

// -------------------------------------------------------------------- pseudo

struct PseudoArgs {
  Real epsilon = 0;
  Real alpha = 0.8;
  Real beta = 0.5;
  std::string out = "pseudo.json";
};

int run_pseudo(const PseudoArgs& args) {
  Config cfg;
  cfg["command"] = "pseudo";
  cfg["epsilon"] = fmt(args.epsilon);
  cfg["alpha"] = fmt(args.alpha);
  cfg["beta"] = fmt(args.beta);
  cfg["out"] = args.out;

  const Params p{args.alpha, args.beta, args.epsilon};
  const auto records = welander::find_pseudoequilibria(p);
  const auto bounds = filippov::sliding_region_bounds(welander::build_hard_switch(p));

  json j;
  j["config"] = config_json(cfg);
  j["sliding_intervals"] = json::array();
  for (const auto& b : bounds) j["sliding_intervals"].push_back({{"lo", b.lo}, {"hi", b.hi}});
  j["pseudoequilibria"] = json::array();
  for (const auto& r : records) {
    json e = json::object();
    e["x"] = r.x;
    e["lambda_star"] = r.lambda_star;
    e["flow_derivative"] = r.flow_derivative;
    e["sliding_stability"] = r.sliding_stability;
    e["classification"] = welander::to_string(r.classification);
    e["stable"] = r.stable();
    j["pseudoequilibria"].push_back(e);
  }
  open_out(args.out) << j.dump(2) << "\n";
  return kOk;
}

// ---------------------------------------------------------------- homoclinic

struct HomoclinicArgs {
  Real delta = 1e-8;
  Real tol = 1e-5;
  Real epsilon = 0;
  bool epsilon_given = false;  ///< default: the collision value itself
  std::vector<Real> slide_times;
  Real family_tol = 1e-4;
  std::string out = "homoclinic.json";
};

int run_homoclinic(const HomoclinicArgs& args) {
  Config cfg;
  cfg["command"] = "homoclinic";
  cfg["delta"] = fmt(args.delta);
  cfg["epsilon"] = args.epsilon_given ? fmt(args.epsilon) : std::string("collision");
  cfg["tol"] = fmt(args.tol);
  cfg["family_tol"] = fmt(args.family_tol);
  cfg["slide_times"] = join(args.slide_times);
  cfg["out"] = args.out;

  const welander::HomoclinicCheck base =
      args.epsilon_given ? welander::verify_homoclinic_at(args.epsilon, args.delta, args.tol)
                         : welander::verify_homoclinic(args.delta, args.tol);
  bool all_verified = base.verified;

  json j;
  j["config"] = config_json(cfg);
  j["base"] = {{"verified", base.verified},
               {"epsilon", base.epsilon},
               {"crossing_x", base.crossing_x},
               {"return_distance", base.return_distance}};
  if (!args.slide_times.empty()) {
    const auto family = welander::homoclinic_family(args.slide_times, args.family_tol);
    j["family"] = json::array();
    for (const auto& m : family) {
      j["family"].push_back({{"slide_time", m.slide_time},
                             {"escape", m.escape_up ? "up" : "down"},
                             {"detach_x", m.detach_x},
                             {"crossings", m.crossings},
                             {"return_distance", m.return_distance},
                             {"verified", m.verified}});
      all_verified = all_verified && m.verified;
    }
  }
  open_out(args.out) << j.dump(2) << "\n";
  return all_verified ? kOk : kUnverified;
}

// ----------------------------------------------------------------- smoothbif

struct SmoothbifArgs {
  std::vector<Real> widths;
  std::string out = "smoothbif.json";
};

int run_smoothbif(const SmoothbifArgs& args) {
  Config cfg;
  cfg["command"] = "smoothbif";
  cfg["a"] = join(args.widths);
  cfg["out"] = args.out;

  const auto rows = welander::limit_study(args.widths);
  bool verified = !rows.empty();
  json j;
  j["config"] = config_json(cfg);
  j["rows"] = json::array();
  for (const auto& r : rows) {
    j["rows"].push_back(
        {{"a", r.a}, {"eps_hopf", r.eps_hopf}, {"eps_snpo", r.eps_snpo}, {"gap", r.gap}});
    verified = verified && r.gap > 0;
  }
  open_out(args.out) << j.dump(2) << "\n";
  return verified ? kOk : kUnverified;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Convection-switch dynamics: simulations, sweeps, bifurcation reports"};
  app.require_subcommand(1);

  SimulateArgs sim;
  CLI::App* sim_cmd = app.add_subcommand("simulate", "integrate one trajectory to CSV/JSON");
  sim_cmd->add_option("--model", sim.model, "nonsmooth (hard switch) or smooth (tanh-like layer)")
      ->required()
      ->check(CLI::IsMember({"nonsmooth", "smooth"}));
  sim_cmd->add_option("--epsilon", sim.epsilon, "switch threshold offset")->required();
  CLI::Option* a_opt = sim_cmd->add_option("--a", sim.a, "boundary-layer width (smooth model)");
  sim_cmd->add_option("--alpha", sim.alpha, "thermal transport ratio");
  sim_cmd->add_option("--beta", sim.beta, "saline transport ratio");
  sim_cmd->add_option("--x0", sim.x0, "initial x")->required();
  sim_cmd->add_option("--y0", sim.y0, "initial y")->required();
  sim_cmd->add_option("--t-max", sim.t_max, "time budget");
  sim_cmd->add_option("--rel-tol", sim.rel_tol, "integrator relative tolerance");
  sim_cmd->add_option("--abs-tol", sim.abs_tol, "integrator absolute tolerance");
  sim_cmd->add_option("--event-tol", sim.event_tol, "switch localization tolerance");
  sim_cmd->add_option("--policy", sim.policy, "continuation at unstable sliding")
      ->check(CLI::IsMember({"escape-lower", "escape-upper", "hold"}));
  sim_cmd->add_option("--format", sim.format, "output format")
      ->check(CLI::IsMember({"csv", "json"}));
  sim_cmd->add_option("--out", sim.out, "output path");

  DiagramArgs dia;
  CLI::App* dia_cmd = app.add_subcommand("diagram", "attractor sweep over epsilon to CSV");
  dia_cmd->add_option("--lo", dia.lo, "lower end of the epsilon range")->required();
  dia_cmd->add_option("--hi", dia.hi, "upper end of the epsilon range")->required();
  dia_cmd->add_option("--n", dia.n, "number of samples")->required();
  dia_cmd->add_option("--threads", dia.threads, "worker threads (0 = auto)");
  dia_cmd->add_option("--out", dia.out, "output path");

  PseudoArgs pse;
  CLI::App* pse_cmd = app.add_subcommand("pseudo", "sliding-flow equilibria report (JSON)");
  pse_cmd->add_option("--epsilon", pse.epsilon, "switch threshold offset")->required();
  pse_cmd->add_option("--alpha", pse.alpha, "thermal transport ratio");
  pse_cmd->add_option("--beta", pse.beta, "saline transport ratio");
  pse_cmd->add_option("--out", pse.out, "output path");

  HomoclinicArgs hom;
  CLI::App* hom_cmd =
      app.add_subcommand("homoclinic", "connection check at the upper collision value (JSON)");
  hom_cmd->add_option("--delta", hom.delta, "launch offset below the collided equilibrium");
  CLI::Option* heps_opt = hom_cmd->add_option(
      "--epsilon", hom.epsilon, "run the check at this epsilon instead (negative control)");
  hom_cmd->add_option("--tol", hom.tol, "accepted return distance");
  hom_cmd->add_option("--slide-times", hom.slide_times, "also verify family members")
      ->expected(-1);
  hom_cmd->add_option("--family-tol", hom.family_tol, "accepted family return distance");
  hom_cmd->add_option("--out", hom.out, "output path");

  SmoothbifArgs smo;
  CLI::App* smo_cmd =
      app.add_subcommand("smoothbif", "Hopf + orbit-fold limit study per layer width (JSON)");
  smo_cmd->add_option("--a", smo.widths, "layer widths")->required()->expected(-1);
  smo_cmd->add_option("--out", smo.out, "output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }
  sim.a_given = a_opt->count() > 0;
  hom.epsilon_given = heps_opt->count() > 0;

  try {
    if (sim_cmd->parsed()) return run_simulate(sim);
    if (dia_cmd->parsed()) return run_diagram(dia);
    if (pse_cmd->parsed()) return run_pseudo(pse);
    if (hom_cmd->parsed()) return run_homoclinic(hom);
    if (smo_cmd->parsed()) return run_smoothbif(smo);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumeric;
  }
  return kUsage;
}
