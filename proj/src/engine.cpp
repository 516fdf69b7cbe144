#include <screwsim/engine.hpp>

#include <screwsim/errors.hpp>
#include <screwsim/random.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <future>
#include <limits>
#include <sstream>
#include <thread>

namespace screwsim {

namespace {

bool is_limited(Law law) {
  return law == Law::parallel_limited || law == Law::screw_limited;
}

VirtualParticle resolve_virtual(const VirtualSpec& spec) {
  try {
    return make_virtual_particle(spec.omega0, spec.pitch, spec.axis_point, spec.phase);
  } catch (const std::invalid_argument& e) {
    throw SchemaError(std::string("virtual particle: ") + e.what());
  }
}

// Evaluation context resolved once before integration starts.
struct LawContext {
  Law law = Law::parallel;
  Vec3 omega0 = Vec3::Zero();
  double alpha = 0.0;
  std::optional<VirtualParticle> vp;
  GroupAssignment ga;
  const GraphSchedule* schedule = nullptr;

  void advance_references(double h) {
    if (vp) *vp = step_virtual(*vp, h);
    for (auto& g : ga.groups) g = step_virtual(g, h);
  }
};

struct LawEval {
  std::vector<ControlInput> controls;
  std::vector<Vec3> domega;
  std::vector<Vec3> db;
  std::vector<Vec3> dc;
};

LawEval evaluate_law(const LawContext& ctx, const SwarmState& s,
                     const std::vector<ControllerState>& cs) {
  LawEval out;
  switch (ctx.law) {
    case Law::parallel:
      out.controls = ctl_parallel(s, +1);
      break;
    case Law::balanced:
      out.controls = ctl_parallel(s, -1);
      break;
    case Law::screw_fixed:
      out.controls = ctl_screw_fixed(s, ctx.omega0);
      break;
    case Law::screw_pitch:
      out.controls = ctl_screw_pitch(s, ctx.omega0, ctx.alpha);
      break;
    case Law::screw_dynamic: {
      DynamicLawOutput r = ctl_screw_dynamic(s, cs);
      out.controls = std::move(r.controls);
      out.domega = std::move(r.domega);
      break;
    }
    case Law::screw_reference:
      out.controls = ctl_screw_reference(s, *ctx.vp);
      break;
    case Law::screw_multigroup:
      out.controls = ctl_screw_multigroup(s, ctx.ga);
      break;
    case Law::parallel_limited: {
      LimitedParallelOutput r = ctl_parallel_limited(s, cs, ctx.schedule->at(s.time));
      out.controls = std::move(r.controls);
      out.db = std::move(r.db);
      break;
    }
    case Law::screw_limited: {
      LimitedScrewOutput r = ctl_screw_limited(s, cs, ctx.schedule->at(s.time));
      out.controls = std::move(r.controls);
      out.domega = std::move(r.domega);
      out.db = std::move(r.db);
      out.dc = std::move(r.dc);
      break;
    }
  }
  return out;
}

LawContext make_context(const SimConfig& cfg) {
  LawContext ctx;
  ctx.law = cfg.law;
  ctx.omega0 = cfg.omega0;
  ctx.alpha = cfg.alpha;
  if (cfg.law == Law::screw_reference) {
    if (!cfg.virtual_particle) {
      throw SchemaError("screw_reference requires a virtual particle");
    }
    ctx.vp = resolve_virtual(*cfg.virtual_particle);
  }
  if (cfg.law == Law::screw_multigroup) {
    if (cfg.groups.empty()) throw SchemaError("screw_multigroup requires groups");
    ctx.ga.group_of.assign(cfg.n_agents, -1);
    for (const GroupSpec& gs : cfg.groups) {
      if (gs.agents.empty()) throw SchemaError("group with no agents");
      const int gi = static_cast<int>(ctx.ga.groups.size());
      for (int id : gs.agents) {
        if (id < 1 || id > cfg.n_agents) {
          throw SchemaError("group agent id out of range: " + std::to_string(id));
        }
        if (ctx.ga.group_of[id - 1] != -1) {
          throw SchemaError("agent assigned to two groups: " + std::to_string(id));
        }
        ctx.ga.group_of[id - 1] = gi;
      }
      ctx.ga.groups.push_back(resolve_virtual(gs.virtual_particle));
    }
    for (int k = 0; k < cfg.n_agents; ++k) {
      if (ctx.ga.group_of[k] == -1) {
        throw SchemaError("agent without a group: " + std::to_string(k + 1));
      }
    }
  }
  if (is_limited(cfg.law)) {
    if (!cfg.schedule) throw SchemaError(law_name(cfg.law) + " requires a graph schedule");
    if (cfg.schedule->n != cfg.n_agents) {
      throw SchemaError("schedule node count does not match n_agents");
    }
    // The last control evaluation happens at steps * h, which can differ from
    // the nominal horizon by rounding; the coverage check uses that time.
    const double t_final = static_cast<double>(std::llround(cfg.horizon / cfg.h)) * cfg.h;
    if (!cfg.schedule->period && cfg.schedule->span() < t_final) {
      throw SchemaError("aperiodic schedule does not cover the horizon");
    }
    ctx.schedule = &*cfg.schedule;
  }
  return ctx;
}

void validate(const SimConfig& cfg) {
  if (cfg.n_agents < 1) throw SchemaError("n_agents must be at least 1");
  if (!(cfg.h > 0.0)) throw SchemaError("h must be positive");
  if (!(cfg.horizon >= cfg.h)) throw SchemaError("horizon must be at least h");
  if (cfg.stride < 1) throw SchemaError("stride must be at least 1");
  if (!(cfg.window_fraction > 0.0 && cfg.window_fraction <= 1.0)) {
    throw SchemaError("window_fraction must lie in (0,1]");
  }
  if (cfg.law == Law::screw_pitch) {
    if (cfg.omega0.norm() == 0.0) throw SchemaError("screw_pitch requires omega0 != 0");
    if (!(cfg.alpha >= 0.0 && cfg.alpha < 1.0)) {
      throw SchemaError("screw_pitch requires alpha in [0,1)");
    }
  }
  if (cfg.explicit_init) {
    const InitialState& init = *cfg.explicit_init;
    if (init.swarm.size() != cfg.n_agents ||
        static_cast<int>(init.ctl.size()) != cfg.n_agents) {
      throw SchemaError("explicit initial state does not match n_agents");
    }
    for (const AgentState& a : init.swarm.agents) {
      if (!is_rotation(a.pose.R)) {
        throw SchemaError("explicit initial pose is not a rotation");
      }
    }
  }
}

// Monitored Lyapunov potentials; value is compared step to step.
double potential_sync(const SwarmState& s) {
  const double n = s.size();
  return 0.5 * n * (1.0 - heading_average(s).squaredNorm());
}

double potential_balance(const SwarmState& s) {
  const double n = s.size();
  return 0.5 * n * heading_average(s).squaredNorm();
}

double potential_relative(const SwarmState& s, const Vec3& omega_ref) {
  Vec3 v_av = Vec3::Zero();
  std::vector<Vec3> v(s.agents.size());
  for (size_t k = 0; k < s.agents.size(); ++k) {
    v[k] = heading(s.agents[k]) + position(s.agents[k]).cross(omega_ref);
    v_av += v[k];
  }
  v_av /= static_cast<double>(s.agents.size());
  double sum = 0.0;
  for (const Vec3& vk : v) sum += (vk - v_av).squaredNorm();
  return 0.5 * sum;
}

double potential_pitch(const SwarmState& s, const Vec3& omega0, double alpha) {
  const double n = s.size();
  const double axial = omega0.dot(heading_average(s)) / omega0.norm();
  const double err = axial - alpha;
  return 0.5 * n * err * err;
}

double potential_rotation_consensus(const SwarmState& s,
                                    const std::vector<ControllerState>& cs) {
  Vec3 w_av = Vec3::Zero();
  std::vector<Vec3> w(s.agents.size());
  for (size_t k = 0; k < s.agents.size(); ++k) {
    w[k] = s.agents[k].pose.R * cs[k].omega;
    w_av += w[k];
  }
  w_av /= static_cast<double>(s.agents.size());
  double sum = 0.0;
  for (const Vec3& wk : w) sum += (wk - w_av).squaredNorm();
  return 0.5 * static_cast<double>(s.agents.size()) * sum;
}

std::string monitored_name(Law law) {
  switch (law) {
    case Law::parallel: return "V_x";
    case Law::balanced: return "V_x_balanced";
    case Law::screw_fixed: return "S";
    case Law::screw_pitch: return "Q+S";
    case Law::screw_dynamic: return "U";
    default: return {};
  }
}

double monitored_value(const SimConfig& cfg, const SwarmState& s,
                       const std::vector<ControllerState>& cs) {
  switch (cfg.law) {
    case Law::parallel: return potential_sync(s);
    case Law::balanced: return potential_balance(s);
    case Law::screw_fixed: return potential_relative(s, cfg.omega0);
    case Law::screw_pitch:
      return potential_pitch(s, cfg.omega0, cfg.alpha) + potential_relative(s, cfg.omega0);
    case Law::screw_dynamic: return potential_rotation_consensus(s, cs);
    default: return 0.0;
  }
}

MetricsRecord compute_metrics(const SimConfig& cfg, const LawContext& ctx,
                              const SwarmState& s,
                              const std::vector<ControlInput>& controls,
                              const std::vector<ControllerState>& cs,
                              double max_ortho) {
  MetricsRecord m;
  m.t = s.time;
  const int n = s.size();
  m.x_av = heading_average(s);
  m.r_av = position_average(s);
  m.xav_norm = m.x_av.norm();
  m.twist_dispersion = twist_dispersion(s, controls);
  m.V = 0.5 * m.twist_dispersion;
  m.V_x = 0.5 * n * (1.0 - m.x_av.squaredNorm());
  m.max_ortho_drift = max_ortho;

  std::optional<Vec3> omega_ref;
  if (cfg.law == Law::screw_fixed || cfg.law == Law::screw_pitch) omega_ref = cfg.omega0;
  if (cfg.law == Law::screw_reference) omega_ref = ctx.vp->omega0;
  if (omega_ref) {
    m.S = potential_relative(s, *omega_ref);
    Vec3 v_av = Vec3::Zero();
    for (const AgentState& a : s.agents) {
      v_av += heading(a) + position(a).cross(*omega_ref);
    }
    m.v_av = v_av / n;
  }
  if (cfg.law == Law::screw_pitch) m.Q = potential_pitch(s, cfg.omega0, cfg.alpha);
  if (cfg.law == Law::screw_dynamic || cfg.law == Law::screw_limited) {
    m.U = potential_rotation_consensus(s, cs);
    Vec3 w_av = Vec3::Zero();
    for (int k = 0; k < n; ++k) w_av += s.agents[k].pose.R * cs[k].omega;
    m.w_av = w_av / n;
  }
  m.pitch.resize(n);
  for (int k = 0; k < n; ++k) {
    const Vec3& u = controls[k];
    if (u.norm() > 1e-12) m.pitch[k] = u.x() / u.squaredNorm();
  }
  return m;
}

void check_finite(const std::vector<ControlInput>& controls, double t) {
  for (const ControlInput& u : controls) {
    if (!u.allFinite()) {
      std::ostringstream msg;
      msg << "non-finite control at t = " << t;
      throw SimulationError(msg.str());
    }
  }
}

}  // namespace

ColumnLayout layout_for(Law law) {
  ColumnLayout out;
  switch (law) {
    case Law::screw_dynamic:
      out.omega = true;
      break;
    case Law::parallel_limited:
      out.b = true;
      break;
    case Law::screw_limited:
      out.omega = out.b = out.c = true;
      break;
    default:
      break;
  }
  return out;
}

std::string kind_name(EquilibriumKind kind) {
  switch (kind) {
    case EquilibriumKind::Parallel: return "Parallel";
    case EquilibriumKind::Circular: return "Circular";
    case EquilibriumKind::Helical: return "Helical";
    case EquilibriumKind::None: return "None";
  }
  return "None";
}

InitialState resolve_initials(const SimConfig& cfg) {
  validate(cfg);
  if (cfg.explicit_init) return *cfg.explicit_init;

  InitialState out;
  Rng rng(cfg.seed);
  out.swarm.time = 0.0;
  out.swarm.agents.resize(cfg.n_agents);
  for (int k = 0; k < cfg.n_agents; ++k) {
    AgentState& a = out.swarm.agents[k];
    a.id = k + 1;
    a.pose.r = rng.vec_in_box(cfg.init.position.lo, cfg.init.position.hi);
    a.pose.R = rng.rotation();
  }
  // Consensus variables are drawn in the spatial frame so their distribution
  // does not depend on the frame draw, then mapped into each body. All three
  // are always drawn to keep the stream position independent of the law.
  out.ctl.resize(cfg.n_agents);
  for (int k = 0; k < cfg.n_agents; ++k) {
    const Vec3 wa = rng.vec_in_box(cfg.init.omega.lo, cfg.init.omega.hi);
    const Vec3 ba = rng.vec_in_box(cfg.init.b.lo, cfg.init.b.hi);
    const Vec3 ca = rng.vec_in_box(cfg.init.c.lo, cfg.init.c.hi);
    const AgentState& a = out.swarm.agents[k];
    out.ctl[k].omega = a.pose.R.transpose() * wa;
    out.ctl[k].b = a.pose.R.transpose() * ba;
    out.ctl[k].c = a.pose.R.transpose() * (ca - a.pose.r);
  }
  return out;
}

SimConfig apply_group_action(const SimConfig& cfg, const Mat3& R0, const Vec3& T0) {
  if (!is_rotation(R0)) throw SchemaError("group action: R0 is not a rotation");
  InitialState init = resolve_initials(cfg);
  for (AgentState& a : init.swarm.agents) {
    a.pose.r = R0 * a.pose.r + T0;
    a.pose.R = R0 * a.pose.R;
  }
  // Body-frame consensus values carry over unchanged: with the new pose the
  // spatial images come out as R0 w^a (and R0 c^a + T0), which is the action
  // the invariance statements require.
  SimConfig out = cfg;
  out.explicit_init = std::move(init);
  return out;
}

void step_poses(SwarmState& s, const std::vector<ControlInput>& controls, double h) {
  if (controls.size() != s.agents.size()) {
    throw std::invalid_argument("step_poses: control count mismatch");
  }
  for (size_t k = 0; k < s.agents.size(); ++k) {
    Pose& g = s.agents[k].pose;
    const Pose P = exp_se3(body_twist(controls[k]), h);
    const Vec3 dr = g.R * P.r;
    g.r += dr;
    g.R = g.R * P.R;
  }
}

std::vector<TrajectorySample> trailing_window(const std::vector<TrajectorySample>& samples,
                                              double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw std::invalid_argument("trailing_window: fraction must lie in (0,1]");
  }
  size_t n = static_cast<size_t>(
      std::ceil(fraction * static_cast<double>(samples.size())));
  n = std::min(std::max<size_t>(n, 10), samples.size());
  return {samples.end() - static_cast<std::ptrdiff_t>(n), samples.end()};
}

EquilibriumVerdict classify_equilibrium(const std::vector<TrajectorySample>& window,
                                        const ClassifierOptions& opt,
                                        const std::vector<int>& subset) {
  if (window.size() < 10) {
    throw SimulationError("classification window holds fewer than 10 samples");
  }
  const int n_all = window.front().state.size();
  std::vector<int> idx = subset;
  if (idx.empty()) {
    idx.resize(n_all);
    for (int k = 0; k < n_all; ++k) idx[k] = k;
  }
  for (int k : idx) {
    if (k < 0 || k >= n_all) throw std::invalid_argument("classify: agent index out of range");
  }
  const double m = static_cast<double>(idx.size());

  double disp_sum = 0.0;
  Vec6 mean_acc = Vec6::Zero();
  std::vector<Vec6> xi(idx.size());
  for (const TrajectorySample& sample : window) {
    Vec6 mu = Vec6::Zero();
    for (size_t i = 0; i < idx.size(); ++i) {
      const int k = idx[i];
      xi[i] = to_vec(spatial_twist(sample.state.agents[k], sample.controls[k]));
      mu += xi[i];
    }
    mu /= m;
    for (const Vec6& v : xi) disp_sum += (v - mu).squaredNorm();
    mean_acc += mu;
  }
  mean_acc /= static_cast<double>(window.size());

  EquilibriumVerdict verdict;
  verdict.t_a = window.front().t;
  verdict.t_b = window.back().t;
  verdict.residual = disp_sum / (static_cast<double>(window.size()) * m);
  verdict.mean_twist = from_vec(mean_acc);
  if (verdict.residual <= opt.tol_eq) {
    if (verdict.mean_twist.angular.norm() <= opt.tol_omega) {
      verdict.kind = EquilibriumKind::Parallel;
    } else {
      const ScrewParams sp = screw_of_twist(verdict.mean_twist);
      verdict.kind = std::abs(sp.pitch) <= opt.tol_pitch ? EquilibriumKind::Circular
                                                         : EquilibriumKind::Helical;
      verdict.screw = sp;
    }
  }
  return verdict;
}

SimResult simulate(const SimConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  validate(cfg);
  LawContext ctx = make_context(cfg);
  InitialState init = resolve_initials(cfg);
  SwarmState state = std::move(init.swarm);
  std::vector<ControllerState> cs = std::move(init.ctl);
  const ColumnLayout layout = layout_for(cfg.law);

  const long long steps = std::llround(cfg.horizon / cfg.h);
  if (steps < 1) throw SchemaError("horizon shorter than one step");
  const long long recorded = (steps - 1) / cfg.stride + 2;
  if (recorded < 10) {
    throw SchemaError("stride leaves fewer than 10 samples for classification");
  }

  SimResult res;
  res.monitored_potential = monitored_name(cfg.law);
  const bool monitored = !res.monitored_potential.empty();
  double prev_pot = monitored ? monitored_value(cfg, state, cs) : 0.0;
  double max_increase = -std::numeric_limits<double>::infinity();

  const Vec3 e1 = Vec3::UnitX();
  for (long long m = 0; m < steps; ++m) {
    state.time = static_cast<double>(m) * cfg.h;
    const LawEval eval = evaluate_law(ctx, state, cs);
    check_finite(eval.controls, state.time);

    if (m % cfg.stride == 0) {
      res.trajectory.push_back({state.time, state, eval.controls, cs});
      res.metrics.push_back(
          compute_metrics(cfg, ctx, state, eval.controls, cs, res.max_ortho_drift));
    }

    // Consensus variables advance by an explicit Euler step taken on their
    // spatial images, then transported into the post-step body frame. This
    // keeps the equilibrium sets of the Laplacian flows exactly invariant.
    for (int k = 0; k < cfg.n_agents; ++k) {
      const Pose P = exp_se3(body_twist(eval.controls[k]), cfg.h);
      const Mat3 u_hat = hat3(eval.controls[k]);
      ControllerState& c = cs[k];
      if (layout.omega) {
        c.omega = P.R.transpose() *
                  (c.omega + cfg.h * (eval.domega[k] + u_hat * c.omega));
      }
      if (layout.b) {
        c.b = P.R.transpose() * (c.b + cfg.h * (eval.db[k] + u_hat * c.b));
      }
      if (layout.c) {
        c.c = P.R.transpose() * (c.c + cfg.h * (eval.dc[k] + u_hat * c.c + e1) - P.r);
      }
      Pose& g = state.agents[k].pose;
      const Vec3 dr = g.R * P.r;
      g.r += dr;
      g.R = g.R * P.R;
      if (!g.r.allFinite()) {
        throw SimulationError("non-finite position during integration");
      }
    }
    ctx.advance_references(cfg.h);

    for (const AgentState& a : state.agents) {
      res.max_ortho_drift = std::max(res.max_ortho_drift, ortho_error(a.pose.R));
      res.max_heading_error =
          std::max(res.max_heading_error, std::abs(heading(a).norm() - 1.0));
    }
    if (monitored) {
      const double pot = monitored_value(cfg, state, cs);
      max_increase = std::max(max_increase, pot - prev_pot);
      prev_pot = pot;
    }
  }

  // Final sample at t = horizon.
  state.time = static_cast<double>(steps) * cfg.h;
  const LawEval last = evaluate_law(ctx, state, cs);
  check_finite(last.controls, state.time);
  res.trajectory.push_back({state.time, state, last.controls, cs});
  res.metrics.push_back(
      compute_metrics(cfg, ctx, state, last.controls, cs, res.max_ortho_drift));
  if (monitored) res.max_potential_increase = max_increase;

  res.verdict = classify_equilibrium(trailing_window(res.trajectory, cfg.window_fraction),
                                     cfg.classifier);

  // The shape law's reference screw is whatever rotation the consensus layer
  // settled on, so its relative potential is filled in after the fact.
  if (cfg.law == Law::screw_dynamic) {
    const Vec3 omega_ref = res.verdict.mean_twist.angular;
    for (size_t i = 0; i < res.metrics.size(); ++i) {
      const SwarmState& s = res.trajectory[i].state;
      res.metrics[i].S = potential_relative(s, omega_ref);
      Vec3 v_av = Vec3::Zero();
      for (const AgentState& a : s.agents) {
        v_av += heading(a) + position(a).cross(omega_ref);
      }
      res.metrics[i].v_av = v_av / s.size();
    }
  }

  res.duration_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

std::vector<SimResult> run_many(const std::vector<SimConfig>& configs) {
  std::vector<SimResult> out(configs.size());
  if (configs.empty()) return out;
  const unsigned workers = std::min<unsigned>(
      std::max(1u, std::thread::hardware_concurrency()),
      static_cast<unsigned>(configs.size()));
  std::atomic<size_t> next{0};
  std::vector<std::future<void>> tasks;
  tasks.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    tasks.push_back(std::async(std::launch::async, [&configs, &out, &next] {
      for (size_t i; (i = next.fetch_add(1)) < configs.size();) {
        out[i] = simulate(configs[i]);
      }
    }));
  }
  for (auto& t : tasks) t.get();
  return out;
}

}  // namespace screwsim
