#include <screwsim/swarm.hpp>

#include <stdexcept>

namespace screwsim {

Vec3 heading_average(const SwarmState& s) {
  Vec3 sum = Vec3::Zero();
  for (const auto& a : s.agents) sum += heading(a);
  return sum / static_cast<double>(s.agents.size());
}

Vec3 position_average(const SwarmState& s) {
  Vec3 sum = Vec3::Zero();
  for (const auto& a : s.agents) sum += position(a);
  return sum / static_cast<double>(s.agents.size());
}

Twist body_twist(const ControlInput& u) {
  return {Vec3(1, 0, 0), u};
}

Twist spatial_twist(const AgentState& a, const ControlInput& u) {
  const Vec3 omega = a.pose.R * u;
  return {heading(a) + a.pose.r.cross(omega), omega};
}

double twist_dispersion(const SwarmState& s, const std::vector<ControlInput>& us) {
  if (us.size() != s.agents.size()) {
    throw std::invalid_argument("twist_dispersion: control count does not match swarm size");
  }
  const int n = s.size();
  std::vector<Vec6> xi(n);
  Vec6 mean = Vec6::Zero();
  for (int k = 0; k < n; ++k) {
    xi[k] = to_vec(spatial_twist(s.agents[k], us[k]));
    mean += xi[k];
  }
  mean /= static_cast<double>(n);
  double sum = 0.0;
  for (int k = 0; k < n; ++k) sum += (xi[k] - mean).squaredNorm();
  return sum;
}

Pose relative_pose(const AgentState& a, const AgentState& b) {
  return compose(inverse(a.pose), b.pose);
}

}  // namespace screwsim
