#pragma once

#include <vector>

#include <screwsim/liegroup.hpp>

namespace screwsim {

// A unit-speed agent: the first frame column is its velocity direction.
struct AgentState {
  Pose pose;
  int id = 0;
};

// Steering command: body angular velocity. Forward speed is fixed at one.
using ControlInput = Vec3;

struct SwarmState {
  std::vector<AgentState> agents;
  double time = 0.0;

  int size() const { return static_cast<int>(agents.size()); }
};

inline Vec3 heading(const AgentState& a) { return a.pose.R.col(0); }
inline Vec3 position(const AgentState& a) { return a.pose.r; }

Vec3 heading_average(const SwarmState& s);
Vec3 position_average(const SwarmState& s);

// Body twist under the unit-speed convention: linear part e1, angular part u.
Twist body_twist(const ControlInput& u);

// The agent's twist seen from the world frame.
Twist spatial_twist(const AgentState& a, const ControlInput& u);

// Sum of squared deviations of the spatial twists from their mean; zero iff
// all agents ride one common screw. Throws std::invalid_argument when the
// control count does not match the swarm.
double twist_dispersion(const SwarmState& s, const std::vector<ControlInput>& us);

// Pose of b in a's frame: a^{-1} b. Invariant under a common left action.
Pose relative_pose(const AgentState& a, const AgentState& b);

}  // namespace screwsim
