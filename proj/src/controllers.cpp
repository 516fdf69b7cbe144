#include <screwsim/controllers.hpp>

#include <screwsim/errors.hpp>

#include <cmath>
#include <stdexcept>

namespace screwsim {

namespace {

// Shared core of the bracket-form laws: u_k = R_k^T (omega0 + B_k x x_k) with
// B_k = (r_k - r_av) x omega0 - x_av + extra. The alignment law is the
// omega0 = 0, extra = 0 member, which keeps the reduction exact.
std::vector<ControlInput> bracket_law(const SwarmState& s, const Vec3& omega0,
                                      const Vec3& extra) {
  const Vec3 x_av = heading_average(s);
  const Vec3 r_av = position_average(s);
  std::vector<ControlInput> out;
  out.reserve(s.agents.size());
  for (const auto& a : s.agents) {
    const Vec3 bracket = (a.pose.r - r_av).cross(omega0) - x_av + extra;
    out.push_back(a.pose.R.transpose() * (omega0 + bracket.cross(heading(a))));
  }
  return out;
}

void validate_virtual(const VirtualParticle& vp) {
  if (std::abs(vp.x0.norm() - 1.0) > 1e-9)
    throw std::invalid_argument("virtual particle heading is not unit length");
}

// Fills out[k] for every member; the average runs over members plus the
// virtual particle.
void reference_into(const SwarmState& s, const std::vector<int>& members,
                    const VirtualParticle& vp, std::vector<ControlInput>& out) {
  validate_virtual(vp);
  Vec3 v_sum = vp.spatial_velocity();
  for (int j : members)
    v_sum += heading(s.agents[j]) + s.agents[j].pose.r.cross(vp.omega0);
  const Vec3 v_av = v_sum / static_cast<double>(members.size() + 1);
  for (int k : members) {
    const auto& a = s.agents[k];
    const Vec3 x = heading(a);
    const Vec3 v_k = x + a.pose.r.cross(vp.omega0);
    out[k] = a.pose.R.transpose() * (vp.omega0 + (v_k - v_av).cross(x));
  }
}

}  // namespace

Law law_from_name(const std::string& name) {
  if (name == "parallel") return Law::parallel;
  if (name == "balanced") return Law::balanced;
  if (name == "screw_fixed") return Law::screw_fixed;
  if (name == "screw_pitch") return Law::screw_pitch;
  if (name == "screw_dynamic") return Law::screw_dynamic;
  if (name == "screw_reference") return Law::screw_reference;
  if (name == "screw_multigroup") return Law::screw_multigroup;
  if (name == "parallel_limited") return Law::parallel_limited;
  if (name == "screw_limited") return Law::screw_limited;
  throw SchemaError("unknown control law: " + name);
}

std::string law_name(Law law) {
  switch (law) {
    case Law::parallel: return "parallel";
    case Law::balanced: return "balanced";
    case Law::screw_fixed: return "screw_fixed";
    case Law::screw_pitch: return "screw_pitch";
    case Law::screw_dynamic: return "screw_dynamic";
    case Law::screw_reference: return "screw_reference";
    case Law::screw_multigroup: return "screw_multigroup";
    case Law::parallel_limited: return "parallel_limited";
    case Law::screw_limited: return "screw_limited";
  }
  throw std::logic_error("law_name: unhandled law");
}

std::vector<ControlInput> ctl_parallel(const SwarmState& s, int sign) {
  auto out = bracket_law(s, Vec3::Zero(), Vec3::Zero());
  if (sign < 0)
    for (auto& u : out) u = -u;
  return out;
}

std::vector<ControlInput> ctl_screw_fixed(const SwarmState& s, const Vec3& omega0) {
  return bracket_law(s, omega0, Vec3::Zero());
}

std::vector<ControlInput> ctl_screw_pitch(const SwarmState& s, const Vec3& omega0,
                                          double alpha) {
  const double M = omega0.norm();
  if (M <= 0.0)
    throw std::invalid_argument("ctl_screw_pitch: reference angular velocity is zero");
  if (!(alpha >= 0.0 && alpha < 1.0))
    throw std::invalid_argument("ctl_screw_pitch: alpha must lie in [0,1)");
  const Vec3 x_av = heading_average(s);
  const Vec3 extra = (omega0.dot(x_av) / M - alpha) * (omega0 / M);
  return bracket_law(s, omega0, extra);
}

DynamicLawOutput ctl_screw_dynamic(const SwarmState& s,
                                   const std::vector<ControllerState>& cs) {
  const int n = s.size();
  if (static_cast<int>(cs.size()) != n)
    throw std::invalid_argument("ctl_screw_dynamic: controller state count mismatch");
  const Vec3 x_av = heading_average(s);
  const Vec3 r_av = position_average(s);

  DynamicLawOutput out;
  out.controls.reserve(n);
  out.domega.reserve(n);
  for (int k = 0; k < n; ++k) {
    const auto& a = s.agents[k];
    const Vec3 bracket = (a.pose.R.transpose() * (a.pose.r - r_av)).cross(cs[k].omega) -
                         a.pose.R.transpose() * x_av;
    out.controls.push_back(cs[k].omega + bracket.cross(Vec3::UnitX()));
  }
  for (int k = 0; k < n; ++k) {
    Vec3 d = hat3(out.controls[k]).transpose() * cs[k].omega;
    const Mat3 Rt = s.agents[k].pose.R.transpose();
    for (int j = 0; j < n; ++j) {
      if (j == k) continue;
      d += Rt * (s.agents[j].pose.R * cs[j].omega) - cs[k].omega;
    }
    out.domega.push_back(d);
  }
  return out;
}

VirtualParticle make_virtual_particle(const Vec3& omega0, double pitch,
                                      const Vec3& axis_point, double phase) {
  const double M = omega0.norm();
  if (M <= 1e-12)
    throw std::invalid_argument("make_virtual_particle: omega0 must be nonzero");
  const double axial = pitch * M;
  if (std::abs(axial) > 1.0 + 1e-12)
    throw std::invalid_argument(
        "make_virtual_particle: |pitch| * |omega0| exceeds unit speed");
  const double tangential = std::sqrt(std::max(0.0, 1.0 - axial * axial));
  const Vec3 d = omega0 / M;
  int m = 0;
  for (int i = 1; i < 3; ++i)
    if (std::abs(d[i]) < std::abs(d[m])) m = i;
  const Vec3 ea = d.cross(Vec3::Unit(m)).normalized();
  const Vec3 eb = d.cross(ea);
  const Vec3 dir = std::cos(phase) * ea + std::sin(phase) * eb;

  VirtualParticle vp;
  vp.omega0 = omega0;
  vp.r0 = axis_point + (tangential / M) * dir;
  vp.x0 = pitch * omega0 + tangential * d.cross(dir);
  vp.x0.normalize();
  return vp;
}

VirtualParticle step_virtual(const VirtualParticle& vp, double h) {
  Twist xi;
  xi.linear = vp.spatial_velocity();
  xi.angular = vp.omega0;
  const Pose P = exp_se3(xi, h);
  VirtualParticle out = vp;
  out.r0 = P.R * vp.r0 + P.r;
  out.x0 = P.R * vp.x0;
  return out;
}

std::vector<ControlInput> ctl_screw_reference(const SwarmState& s,
                                              const VirtualParticle& vp) {
  std::vector<int> members(s.agents.size());
  for (size_t k = 0; k < members.size(); ++k) members[k] = static_cast<int>(k);
  std::vector<ControlInput> out(s.agents.size());
  reference_into(s, members, vp, out);
  return out;
}

std::vector<ControlInput> ctl_screw_multigroup(const SwarmState& s,
                                               const GroupAssignment& ga) {
  const int n = s.size();
  if (static_cast<int>(ga.group_of.size()) != n)
    throw std::invalid_argument("ctl_screw_multigroup: every agent needs a group");
  const int groups = static_cast<int>(ga.groups.size());
  std::vector<std::vector<int>> members(groups);
  for (int k = 0; k < n; ++k) {
    const int i = ga.group_of[k];
    if (i < 0 || i >= groups)
      throw std::invalid_argument("ctl_screw_multigroup: group index out of range");
    members[i].push_back(k);
  }
  std::vector<ControlInput> out(n);
  for (int i = 0; i < groups; ++i)
    if (!members[i].empty()) reference_into(s, members[i], ga.groups[i], out);
  return out;
}

std::vector<NeighborObs> build_observations(const SwarmState& s,
                                            const std::vector<ControllerState>& cs,
                                            const GraphSnapshot& g, int k) {
  const int n = s.size();
  if (g.n != n || g.weights.rows() != n || g.weights.cols() != n)
    throw std::invalid_argument("build_observations: graph size mismatch");
  if (static_cast<int>(cs.size()) != n)
    throw std::invalid_argument("build_observations: controller state count mismatch");
  std::vector<NeighborObs> obs;
  const auto& ak = s.agents[k];
  for (int j = 0; j < n; ++j) {
    if (j == k) continue;
    const double w = g.weights(k, j);
    if (w <= 0.0) continue;
    NeighborObs o;
    o.j = j;
    o.weight = w;
    o.rel_rot = ak.pose.R.transpose() * s.agents[j].pose.R;
    o.rel_pos = ak.pose.R.transpose() * (s.agents[j].pose.r - ak.pose.r);
    o.omega = cs[j].omega;
    o.b = cs[j].b;
    o.c = cs[j].c;
    obs.push_back(o);
  }
  return obs;
}

LimitedParallelOutput ctl_parallel_limited(const SwarmState& s,
                                           const std::vector<ControllerState>& cs,
                                           const GraphSnapshot& g) {
  const int n = s.size();
  LimitedParallelOutput out;
  out.controls.reserve(n);
  out.db.reserve(n);
  for (int k = 0; k < n; ++k) {
    const Vec3 b = cs[k].b;
    const Vec3 u = Vec3::UnitX().cross(b);
    Vec3 db = hat3(u).transpose() * b;
    for (const auto& o : build_observations(s, cs, g, k))
      db += o.weight * (o.rel_rot * o.b - b);
    out.controls.push_back(u);
    out.db.push_back(db);
  }
  return out;
}

LimitedScrewOutput ctl_screw_limited(const SwarmState& s,
                                     const std::vector<ControllerState>& cs,
                                     const GraphSnapshot& g) {
  const int n = s.size();
  LimitedScrewOutput out;
  out.controls.reserve(n);
  out.domega.reserve(n);
  out.db.reserve(n);
  out.dc.reserve(n);
  for (int k = 0; k < n; ++k) {
    const Vec3 w = cs[k].omega;
    const Vec3 b = cs[k].b;
    const Vec3 c = cs[k].c;
    const Vec3 u = w + (w.cross(c) - b).cross(Vec3::UnitX());
    const Mat3 hat_t = hat3(u).transpose();
    Vec3 dw = hat_t * w;
    Vec3 db = hat_t * b;
    Vec3 dc = hat_t * c - Vec3::UnitX();
    for (const auto& o : build_observations(s, cs, g, k)) {
      dw += o.weight * (o.rel_rot * o.omega - w);
      db += o.weight * (o.rel_rot * o.b - b);
      dc += o.weight * ((o.rel_rot * o.c - c) + o.rel_pos);
    }
    out.controls.push_back(u);
    out.domega.push_back(dw);
    out.db.push_back(db);
    out.dc.push_back(dc);
  }
  return out;
}

}  // namespace screwsim
