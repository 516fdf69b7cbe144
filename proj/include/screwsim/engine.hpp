#pragma once

#include <screwsim/controllers.hpp>
#include <screwsim/graph.hpp>
#include <screwsim/liegroup.hpp>
#include <screwsim/swarm.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace screwsim {

struct BoxSpec {
  Vec3 lo = Vec3(-1, -1, -1);
  Vec3 hi = Vec3(1, 1, 1);
};

// Random initial conditions: poses from the position box and uniform random
// frames; consensus variables drawn in the spatial frame and mapped into each
// agent's body frame.
struct InitSpec {
  BoxSpec position{Vec3(-2, -2, -2), Vec3(2, 2, 2)};
  BoxSpec omega;
  BoxSpec b;
  BoxSpec c;
};

struct ClassifierOptions {
  double tol_eq = 1e-6;     // time-averaged twist dispersion per agent
  double tol_omega = 1e-4;  // |mean angular velocity| below this: Parallel
  double tol_pitch = 1e-3;  // |pitch| below this: Circular
};

// Description of a virtual particle by its screw, resolved at run start.
struct VirtualSpec {
  Vec3 omega0 = Vec3::UnitZ();
  double pitch = 0.0;
  Vec3 axis_point = Vec3::Zero();
  double phase = 0.0;
};

struct GroupSpec {
  std::vector<int> agents;  // 1-based agent ids
  VirtualSpec virtual_particle;
};

struct InitialState {
  SwarmState swarm;
  std::vector<ControllerState> ctl;
};

struct SimConfig {
  Law law = Law::parallel;
  int n_agents = 0;
  double h = 0.01;
  double horizon = 100.0;
  std::uint64_t seed = 0;
  Vec3 omega0 = Vec3::Zero();              // screw_fixed / screw_pitch reference
  double alpha = 0.0;                      // screw_pitch
  std::optional<VirtualSpec> virtual_particle;  // screw_reference
  std::vector<GroupSpec> groups;           // screw_multigroup
  std::optional<GraphSchedule> schedule;   // limited laws
  std::string schedule_path;               // provenance for the manifest
  InitSpec init;
  std::optional<InitialState> explicit_init;  // overrides the random draw
  int stride = 10;
  double window_fraction = 0.2;
  ClassifierOptions classifier;
};

// Which consensus-variable columns a law carries.
struct ColumnLayout {
  bool omega = false;
  bool b = false;
  bool c = false;
};
ColumnLayout layout_for(Law law);

struct TrajectorySample {
  double t = 0.0;
  SwarmState state;
  std::vector<ControlInput> controls;
  std::vector<ControllerState> ctl;
};

// Absent optionals mean "undefined for this law", never zero.
struct MetricsRecord {
  double t = 0.0;
  double V = 0.0;    // half the spatial twist dispersion
  double V_x = 0.0;  // (N/2)(1 - |x_av|^2)
  std::optional<double> S;
  std::optional<double> Q;
  std::optional<double> U;
  double xav_norm = 0.0;
  double twist_dispersion = 0.0;
  double max_ortho_drift = 0.0;  // running max up to t
  Vec3 x_av = Vec3::Zero();
  Vec3 r_av = Vec3::Zero();
  std::optional<Vec3> v_av;  // spatial average of x_k + r_k x omega_ref
  std::optional<Vec3> w_av;  // spatial average of R_k omega_k
  std::vector<std::optional<double>> pitch;  // per agent; absent when u_k = 0
};

enum class EquilibriumKind { Parallel, Circular, Helical, None };
std::string kind_name(EquilibriumKind kind);

struct EquilibriumVerdict {
  EquilibriumKind kind = EquilibriumKind::None;
  std::optional<ScrewParams> screw;  // Circular / Helical only
  double t_a = 0.0;
  double t_b = 0.0;
  double residual = 0.0;  // time-averaged dispersion per agent over the window
  Twist mean_twist;       // window-averaged spatial twist
};

struct SimResult {
  std::vector<TrajectorySample> trajectory;  // strided samples plus the final state
  std::vector<MetricsRecord> metrics;        // aligned with trajectory
  EquilibriumVerdict verdict;
  double max_ortho_drift = 0.0;
  double max_heading_error = 0.0;
  std::optional<double> max_potential_increase;  // largest single-step rise
  std::string monitored_potential;               // empty when no potential applies
  double duration_seconds = 0.0;
};

// Draws the seeded initial state (or returns the explicit one).
InitialState resolve_initials(const SimConfig& cfg);

// Left-multiplies every initial pose by (R0, T0). Body-frame consensus values
// are untouched, which rotates (and for c, translates) their spatial images
// consistently with the group action. Returns a config with explicit initials.
SimConfig apply_group_action(const SimConfig& cfg, const Mat3& R0, const Vec3& T0);

// One pose step: g <- g * exp_se3(body_twist(u), h) for every agent.
void step_poses(SwarmState& s, const std::vector<ControlInput>& controls, double h);

// Trailing classification window: ceil(fraction * size) samples, raised to 10
// when more are available.
std::vector<TrajectorySample> trailing_window(const std::vector<TrajectorySample>& samples,
                                              double fraction);

// Classifies the trailing window. subset (0-based agent indices) restricts the
// dispersion and mean twist to those agents; empty means all. Throws
// SimulationError when fewer than 10 samples are given.
EquilibriumVerdict classify_equilibrium(const std::vector<TrajectorySample>& window,
                                        const ClassifierOptions& opt = {},
                                        const std::vector<int>& subset = {});

// Runs the closed loop. Throws SchemaError on config inconsistencies detected
// before integration and SimulationError on runtime failures.
SimResult simulate(const SimConfig& cfg);

// Seed sweep; runs configs concurrently and returns results in input order.
std::vector<SimResult> run_many(const std::vector<SimConfig>& configs);

}  // namespace screwsim
