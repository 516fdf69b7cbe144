// Command-line front end: simulate, check-graph, analyze, sweep.
//
// Exit codes shared by every subcommand: 0 on success (for check-graph:
// schedule certified), 1 on a property failure (integration blow-up, schedule
// not uniformly connected), 2 on usage or schema errors.

#include <CLI11.hpp>
#include <json.hpp>

#include <screwsim/config.hpp>
#include <screwsim/controllers.hpp>
#include <screwsim/csvio.hpp>
#include <screwsim/engine.hpp>
#include <screwsim/errors.hpp>
#include <screwsim/graph.hpp>
#include <screwsim/liegroup.hpp>
#include <screwsim/swarm.hpp>
#include <screwsim/version.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

using namespace screwsim;

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw SchemaError("cannot open for writing: " + path.string());
  out << text;
  if (!out) throw SchemaError("write failed: " + path.string());
}

std::string vec_text(const Vec3& v) {
  return format_double(v.x()) + " " + format_double(v.y()) + " " + format_double(v.z());
}

// Scalar config fields that may be overridden from the command line. Each
// override applies only when its flag was actually given.
struct Overrides {
  CLI::Option* seed_opt = nullptr;
  CLI::Option* h_opt = nullptr;
  CLI::Option* horizon_opt = nullptr;
  CLI::Option* law_opt = nullptr;
  std::uint64_t seed = 0;
  double h = 0.0;
  double horizon = 0.0;
  std::string law;

  void attach(CLI::App* cmd) {
    seed_opt = cmd->add_option("--seed", seed, "override the config seed");
    h_opt = cmd->add_option("--h", h, "override the integration step");
    horizon_opt = cmd->add_option("--horizon", horizon, "override the time horizon");
    law_opt = cmd->add_option("--law", law, "override the control law by name");
  }

  void apply(SimConfig& cfg) const {
    if (seed_opt->count() > 0) cfg.seed = seed;
    if (h_opt->count() > 0) cfg.h = h;
    if (horizon_opt->count() > 0) cfg.horizon = horizon;
    if (law_opt->count() > 0) cfg.law = law_from_name(law);
  }
};

// Grouped runs steer each group onto its own screw, so the whole-swarm verdict
// is None by construction; per-group classification is what matters there.
std::string group_verdicts_text(const SimConfig& cfg, const SimResult& res) {
  std::string text;
  const std::vector<TrajectorySample> window =
      trailing_window(res.trajectory, cfg.window_fraction);
  for (std::size_t g = 0; g < cfg.groups.size(); ++g) {
    std::vector<int> subset;
    for (int id : cfg.groups[g].agents) subset.push_back(id - 1);
    const EquilibriumVerdict v = classify_equilibrium(window, cfg.classifier, subset);
    text += "group_" + std::to_string(g + 1) + ":\n";
    std::istringstream lines(verdict_text(v));
    for (std::string line; std::getline(lines, line);) text += "  " + line + "\n";
  }
  return text;
}

int run_simulate(const std::string& config_path, const std::string& out_dir,
                 const Overrides& ov) {
  SimConfig cfg = load_config(config_path);
  ov.apply(cfg);
  const SimResult res = simulate(cfg);

  const fs::path dir(out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw SchemaError("cannot create output directory: " + dir.string());

  std::ostringstream traj;
  write_trajectory_csv(traj, res.trajectory, layout_for(cfg.law));
  write_file(dir / "trajectory.csv", traj.str());

  std::ostringstream met;
  write_metrics_csv(met, res.metrics);
  write_file(dir / "metrics.csv", met.str());

  std::string summary = run_summary_text(res);
  if (!cfg.groups.empty()) summary += group_verdicts_text(cfg, res);
  write_file(dir / "verdict.txt", summary);

  const nlohmann::json manifest{
      {"config", config_path},
      {"law", law_name(cfg.law)},
      {"n_agents", cfg.n_agents},
      {"seed", cfg.seed},
      {"output_dir", dir.string()},
      {"version", kVersion},
      {"duration_seconds", res.duration_seconds},
  };
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");

  std::cout << summary << "output: " << dir.string() << "\n";
  return 0;
}

int run_check_graph(const std::string& schedule_path, double T) {
  const GraphSchedule schedule = load_schedule(schedule_path);
  const ConnectivityReport rep = is_uniformly_connected(schedule, T);
  std::cout << "uniformly_connected: " << (rep.uniformly_connected ? "true" : "false") << "\n";
  std::cout << "horizon_T: " << format_double(rep.horizon_T) << "\n";
  std::cout << "certified_horizon: " << format_double(rep.certified_horizon) << "\n";
  if (rep.witness_root) std::cout << "witness_root: " << *rep.witness_root << "\n";
  if (rep.failing_window) {
    std::cout << "failing_window: " << format_double(rep.failing_window->first) << " "
              << format_double(rep.failing_window->second) << "\n";
  }
  return rep.uniformly_connected ? 0 : 1;
}

int run_analyze(const std::string& csv_path, double window_fraction) {
  std::ifstream in(csv_path, std::ios::binary);
  if (!in) throw SchemaError("cannot open trajectory: " + csv_path);
  const TrajectoryData data = read_trajectory_csv(in);

  const std::vector<TrajectorySample> window = trailing_window(data.samples, window_fraction);
  const EquilibriumVerdict verdict = classify_equilibrium(window);
  std::cout << verdict_text(verdict);

  const TrajectorySample& last = data.samples.back();
  std::cout << "final_time: " << format_double(last.t) << "\n";
  for (std::size_t k = 0; k < last.state.agents.size(); ++k) {
    const AgentState& agent = last.state.agents[k];
    const Twist xi = spatial_twist(agent, last.controls[k]);
    std::cout << "agent_" << agent.id << ":";
    if (xi.linear.norm() + xi.angular.norm() == 0.0) {
      std::cout << " zero twist\n";
      continue;
    }
    const ScrewParams sp = screw_of_twist(xi);
    std::cout << " pitch " << format_double(sp.pitch) << ", magnitude "
              << format_double(sp.magnitude) << ", axis_point " << vec_text(sp.axis_point)
              << ", axis_direction " << vec_text(sp.axis_direction) << "\n";
  }

  std::cout << "dispersion_series:\n";
  for (const TrajectorySample& s : data.samples) {
    std::cout << format_double(s.t) << " " << format_double(twist_dispersion(s.state, s.controls))
              << "\n";
  }
  return 0;
}

int run_sweep(const std::string& config_path, int count, const std::string& out_dir,
              const Overrides& ov) {
  if (count < 1) throw SchemaError("sweep: seed count must be at least 1");
  SimConfig base = load_config(config_path);
  ov.apply(base);

  std::vector<SimConfig> cfgs(static_cast<std::size_t>(count), base);
  for (int i = 0; i < count; ++i) cfgs[static_cast<std::size_t>(i)].seed = base.seed + i;
  const std::vector<SimResult> results = run_many(cfgs);

  const fs::path dir(out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw SchemaError("cannot create output directory: " + dir.string());

  std::ostringstream csv;
  csv << "seed,kind,residual,pitch,xav_norm\n";
  std::map<std::string, int> counts;
  for (int i = 0; i < count; ++i) {
    const SimResult& res = results[static_cast<std::size_t>(i)];
    const EquilibriumVerdict& v = res.verdict;
    csv << cfgs[static_cast<std::size_t>(i)].seed << "," << kind_name(v.kind) << ","
        << format_double(v.residual) << ",";
    if (v.screw) csv << format_double(v.screw->pitch);
    csv << "," << format_double(res.metrics.back().xav_norm) << "\n";
    ++counts[kind_name(v.kind)];
  }
  write_file(dir / "sweep.csv", csv.str());

  for (const auto& [kind, n] : counts) std::cout << kind << ": " << n << "/" << count << "\n";
  std::cout << "output: " << (dir / "sweep.csv").string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"steered rigid-body swarm simulator"};
  // Long-form help only: the short -h would shadow the --h step override.
  app.set_help_flag("--help", "print help and exit");
  app.set_version_flag("--version", std::string(screwsim::kVersion));
  app.require_subcommand(1);
  int rc = 0;

  auto* sim = app.add_subcommand("simulate", "integrate one run and write its outputs");
  sim->set_help_flag("--help", "print help and exit");
  std::string sim_config;
  std::string sim_out = "out";
  Overrides sim_ov;
  sim->add_option("config", sim_config, "run configuration JSON")->required();
  sim->add_option("-o,--out", sim_out, "output directory");
  sim_ov.attach(sim);
  sim->callback([&] { rc = run_simulate(sim_config, sim_out, sim_ov); });

  auto* chk = app.add_subcommand("check-graph", "certify uniform connectivity of a schedule");
  std::string chk_schedule;
  double chk_T = 0.0;
  chk->add_option("schedule", chk_schedule, "graph schedule JSON")->required();
  chk->add_option("-T,--T", chk_T, "window length to certify")->required();
  chk->callback([&] { rc = run_check_graph(chk_schedule, chk_T); });

  auto* ana = app.add_subcommand("analyze", "classify a recorded trajectory");
  std::string ana_csv;
  double ana_fraction = 0.2;
  ana->add_option("trajectory", ana_csv, "trajectory CSV written by simulate")->required();
  ana->add_option("--window-fraction", ana_fraction, "trailing fraction of samples to classify");
  ana->callback([&] { rc = run_analyze(ana_csv, ana_fraction); });

  auto* swp = app.add_subcommand("sweep", "run consecutive seeds and tally verdicts");
  swp->set_help_flag("--help", "print help and exit");
  std::string swp_config;
  std::string swp_out = "out";
  int swp_count = 1;
  Overrides swp_ov;
  swp->add_option("config", swp_config, "run configuration JSON")->required();
  swp->add_option("--count", swp_count, "number of consecutive seeds")->required();
  swp->add_option("-o,--out", swp_out, "output directory");
  swp_ov.attach(swp);
  swp->callback([&] { rc = run_sweep(swp_config, swp_count, swp_out, swp_ov); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const screwsim::SchemaError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const screwsim::SimulationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return rc;
}
