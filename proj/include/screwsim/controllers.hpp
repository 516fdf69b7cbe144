#pragma once

#include <screwsim/graph.hpp>
#include <screwsim/liegroup.hpp>
#include <screwsim/swarm.hpp>

#include <string>
#include <vector>

namespace screwsim {

// Laws selectable by name in simulation configs.
enum class Law {
  parallel,
  balanced,
  screw_fixed,
  screw_pitch,
  screw_dynamic,
  screw_reference,
  screw_multigroup,
  parallel_limited,
  screw_limited,
};

Law law_from_name(const std::string& name);  // throws SchemaError on unknown names
std::string law_name(Law law);

// Per-agent consensus variables; only the fields the active law uses matter.
struct ControllerState {
  Vec3 omega = Vec3::Zero();
  Vec3 b = Vec3::Zero();
  Vec3 c = Vec3::Zero();
};

// Unit-speed reference agent riding an exact screw.
struct VirtualParticle {
  Vec3 r0 = Vec3::Zero();
  Vec3 x0 = Vec3::UnitX();  // unit heading
  Vec3 omega0 = Vec3::Zero();

  // Linear part of the spatial twist; constant along the particle's motion.
  Vec3 spatial_velocity() const { return x0 + r0.cross(omega0); }
};

// Places the particle on the screw with the given angular velocity, pitch and
// axis (a point the axis passes through). phase selects the position on the
// feasible circle. Requires |pitch| * |omega0| <= 1 and omega0 != 0.
VirtualParticle make_virtual_particle(const Vec3& omega0, double pitch,
                                      const Vec3& axis_point, double phase);

// Exact screw advance of the virtual particle by h.
VirtualParticle step_virtual(const VirtualParticle& vp, double h);

struct GroupAssignment {
  std::vector<int> group_of;             // agent index -> group index
  std::vector<VirtualParticle> groups;   // one reference per group
};

// What a limited-communication agent may see of neighbor j: the relative pose
// and j's consensus variables, never absolute states.
struct NeighborObs {
  int j = -1;
  double weight = 0.0;
  Mat3 rel_rot = Mat3::Identity();  // R_k^T R_j
  Vec3 rel_pos = Vec3::Zero();      // R_k^T (r_j - r_k)
  Vec3 omega = Vec3::Zero();
  Vec3 b = Vec3::Zero();
  Vec3 c = Vec3::Zero();
};

std::vector<NeighborObs> build_observations(const SwarmState& s,
                                            const std::vector<ControllerState>& cs,
                                            const GraphSnapshot& g, int k);

// u_k = R_k^T (x_k x x_av); sign +1 aligns headings, -1 balances them.
std::vector<ControlInput> ctl_parallel(const SwarmState& s, int sign = 1);

// u_k = R_k^T (omega0 + [(r_k - r_av) x omega0 - x_av] x x_k); omega0 = 0
// reduces to ctl_parallel.
std::vector<ControlInput> ctl_screw_fixed(const SwarmState& s, const Vec3& omega0);

// Adds the axial pitch correction ((omega0 . x_av)/|omega0| - alpha) along the
// reference axis inside the bracket. Requires omega0 != 0 and alpha in [0,1).
std::vector<ControlInput> ctl_screw_pitch(const SwarmState& s, const Vec3& omega0,
                                          double alpha);

struct DynamicLawOutput {
  std::vector<ControlInput> controls;
  std::vector<Vec3> domega;
};

// Shape law with an all-to-all consensus on the rotation vectors omega_k.
DynamicLawOutput ctl_screw_dynamic(const SwarmState& s,
                                   const std::vector<ControllerState>& cs);

// Symmetry-breaking tracking of a virtual particle; the average includes it.
std::vector<ControlInput> ctl_screw_reference(const SwarmState& s,
                                              const VirtualParticle& vp);

// Per-group reference tracking; averages run over group members plus the
// group's own virtual particle. Throws on incomplete assignments.
std::vector<ControlInput> ctl_screw_multigroup(const SwarmState& s,
                                               const GroupAssignment& ga);

struct LimitedParallelOutput {
  std::vector<ControlInput> controls;
  std::vector<Vec3> db;
};

// u_k = e1 x b_k with b_k following the body-frame consensus over neighbors.
LimitedParallelOutput ctl_parallel_limited(const SwarmState& s,
                                           const std::vector<ControllerState>& cs,
                                           const GraphSnapshot& g);

struct LimitedScrewOutput {
  std::vector<ControlInput> controls;
  std::vector<Vec3> domega;
  std::vector<Vec3> db;
  std::vector<Vec3> dc;
};

// u_k = omega_k + (omega_k x c_k - b_k) x e1; omega, b follow the body-frame
// consensus, c additionally drifts by -e1 and couples through relative
// positions so its spatial image R_k c_k + r_k obeys the plain Laplacian flow.
LimitedScrewOutput ctl_screw_limited(const SwarmState& s,
                                     const std::vector<ControllerState>& cs,
                                     const GraphSnapshot& g);

}  // namespace screwsim
