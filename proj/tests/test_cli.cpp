#include <doctest.h>

#include <screwsim/csvio.hpp>
#include <screwsim/engine.hpp>

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace screwsim;
namespace fs = std::filesystem;

namespace {

// The binary under test and the bundled configs are handed over through the
// environment by the test harness.
std::string cli_path() {
  const char* p = std::getenv("SCREWSIM_CLI");
  REQUIRE_MESSAGE(p != nullptr, "SCREWSIM_CLI must point at the CLI binary");
  return p;
}

fs::path source_dir() {
  const char* p = std::getenv("SCREWSIM_SOURCE_DIR");
  REQUIRE_MESSAGE(p != nullptr, "SCREWSIM_SOURCE_DIR must point at the repository root");
  return fs::path(p);
}

fs::path config(const std::string& name) { return source_dir() / "configs" / name; }
fs::path schedule(const std::string& name) { return source_dir() / "schedules" / name; }

fs::path make_temp_dir() {
  std::string tmpl = (fs::temp_directory_path() / "screwsim_cli_XXXXXX").string();
  REQUIRE(mkdtemp(tmpl.data()) != nullptr);
  return fs::path(tmpl);
}

struct CmdResult {
  int code = -1;
  std::string output;  // stdout and stderr merged
};

CmdResult run_cli(const std::string& args) {
  const std::string cmd = cli_path() + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  CmdResult res;
  char buf[4096];
  for (std::size_t n; (n = fread(buf, 1, sizeof buf, pipe)) > 0;) res.output.append(buf, n);
  const int status = pclose(pipe);
  res.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return res;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE_MESSAGE(in.good(), ("cannot open " + path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Value of the first "key: ..." line, or an empty string when absent.
std::string line_value(const std::string& text, const std::string& key) {
  const std::string tag = key + ": ";
  std::istringstream lines(text);
  for (std::string line; std::getline(lines, line);) {
    if (line.rfind(tag, 0) == 0) return line.substr(tag.size());
  }
  return {};
}

double number_value(const std::string& text, const std::string& key) {
  const std::string v = line_value(text, key);
  REQUIRE_MESSAGE(!v.empty(), ("missing line: " + key));
  return std::strtod(v.c_str(), nullptr);
}

std::vector<std::string> first_lines(const std::string& text, std::size_t count) {
  std::vector<std::string> out;
  std::istringstream lines(text);
  for (std::string line; out.size() < count && std::getline(lines, line);) out.push_back(line);
  return out;
}

// Header plus the rows of the first `samples` recorded times, assuming
// `agents` rows per time.
void truncate_trajectory(const fs::path& src, const fs::path& dst, int samples, int agents) {
  std::ifstream in(src);
  std::ofstream out(dst, std::ios::binary);
  std::string line;
  for (int i = 0; i <= samples * agents && std::getline(in, line); ++i) out << line << "\n";
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("simulate writes trajectory, metrics, verdict, and manifest") {
  const fs::path dir = make_temp_dir();
  const CmdResult res =
      run_cli("simulate " + config("parallel_n10.json").string() + " -o " + (dir / "run").string());
  CHECK(res.code == 0);

  const std::string verdict = slurp(dir / "run" / "verdict.txt");
  CHECK(line_value(verdict, "kind") == "Parallel");
  CHECK(number_value(verdict, "max_ortho_drift") <= 1e-9);
  CHECK(line_value(verdict, "monitored_potential") == "V_x");

  const std::string manifest = slurp(dir / "run" / "manifest.json");
  CHECK(manifest.find("\"law\": \"parallel\"") != std::string::npos);
  CHECK(manifest.find("\"seed\": 1") != std::string::npos);
  CHECK(manifest.find("\"version\"") != std::string::npos);

  std::ifstream traj(dir / "run" / "trajectory.csv");
  const TrajectoryData data = read_trajectory_csv(traj);
  CHECK(data.samples.size() == 1001);  // stride 10 over 10000 steps, plus the final state
  CHECK(data.samples.front().state.agents.size() == 10);
  CHECK_FALSE(data.layout.omega);

  CHECK(slurp(dir / "run" / "metrics.csv").rfind("t,V,V_x,S,Q,U,", 0) == 0);
  fs::remove_all(dir);
}

TEST_CASE("simulate output is byte-identical across reruns") {
  const fs::path dir = make_temp_dir();
  const std::string cfg = config("parallel_n10.json").string();
  CHECK(run_cli("simulate " + cfg + " -o " + (dir / "a").string()).code == 0);
  CHECK(run_cli("simulate " + cfg + " -o " + (dir / "b").string()).code == 0);
  for (const char* name : {"trajectory.csv", "metrics.csv", "verdict.txt"}) {
    CHECK_MESSAGE(slurp(dir / "a" / name) == slurp(dir / "b" / name), name);
  }
  fs::remove_all(dir);
}

TEST_CASE("analyze reproduces the recorded verdict from the trajectory alone") {
  const fs::path dir = make_temp_dir();
  REQUIRE(run_cli("simulate " + config("parallel_n10.json").string() + " -o " + dir.string())
              .code == 0);
  const CmdResult res = run_cli("analyze " + (dir / "trajectory.csv").string());
  CHECK(res.code == 0);

  // The CSV round-trips doubles exactly, so the re-derived verdict block must
  // match the recorded one byte for byte.
  const auto recorded = first_lines(slurp(dir / "verdict.txt"), 6);
  const auto derived = first_lines(res.output, 6);
  REQUIRE(recorded.size() == 6);
  CHECK(recorded == derived);

  CHECK(res.output.find("agent_10: pitch inf") != std::string::npos);
  CHECK(res.output.find("dispersion_series:") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("analyze of a pre-convergence window reports no equilibrium") {
  const fs::path dir = make_temp_dir();
  REQUIRE(run_cli("simulate " + config("parallel_n10.json").string() + " -o " + dir.string())
              .code == 0);
  truncate_trajectory(dir / "trajectory.csv", dir / "early.csv", 11, 10);
  const CmdResult res = run_cli("analyze " + (dir / "early.csv").string());
  CHECK(res.code == 0);
  CHECK(line_value(res.output, "kind") == "None");
  fs::remove_all(dir);
}

TEST_CASE("failures map to the documented exit codes") {
  const fs::path dir = make_temp_dir();
  REQUIRE(run_cli("simulate " + config("parallel_n10.json").string() + " -o " + dir.string())
              .code == 0);

  // Too few samples to classify: a property failure, not a schema one.
  truncate_trajectory(dir / "trajectory.csv", dir / "tiny.csv", 5, 10);
  CHECK(run_cli("analyze " + (dir / "tiny.csv").string()).code == 1);

  // Wrong file shape, unknown config key, missing file, unknown flag: all usage.
  CHECK(run_cli("analyze " + (dir / "metrics.csv").string()).code == 2);
  std::ofstream(dir / "bad.json") << "{\"law\": \"parallel\", \"n_agents\": 3, \"stepsize\": 0.01}";
  CHECK(run_cli("simulate " + (dir / "bad.json").string()).code == 2);
  CHECK(run_cli("simulate " + (dir / "absent.json").string()).code == 2);
  CHECK(run_cli("simulate " + config("parallel_n10.json").string() + " --frobnicate").code == 2);
  CHECK(run_cli("frobnicate").code == 2);
  fs::remove_all(dir);
}

TEST_CASE("check-graph certifies and rejects schedules with matching exit codes") {
  CmdResult res = run_cli("check-graph " + schedule("cycling3.json").string() + " -T 0.3");
  CHECK(res.code == 0);
  CHECK(line_value(res.output, "uniformly_connected") == "true");
  CHECK(line_value(res.output, "certified_horizon") == "inf");
  CHECK_FALSE(line_value(res.output, "witness_root").empty());

  res = run_cli("check-graph " + schedule("ring_star6.json").string() + " -T 0.5");
  CHECK(res.code == 0);
  CHECK(line_value(res.output, "uniformly_connected") == "true");

  res = run_cli("check-graph " + schedule("isolated4.json").string() + " -T 10");
  CHECK(res.code == 1);
  CHECK(line_value(res.output, "uniformly_connected") == "false");
  CHECK(line_value(res.output, "failing_window") == "0 10");

  // Window longer than an aperiodic schedule's coverage cannot be certified.
  CHECK(run_cli("check-graph " + schedule("isolated4.json").string() + " -T 20").code == 2);
  CHECK(run_cli("check-graph " + config("parallel_n10.json").string() + " -T 1").code == 2);
}

TEST_CASE("scalar flags override the stored configuration") {
  const fs::path dir = make_temp_dir();
  const std::string cfg = config("parallel_n10.json").string();
  REQUIRE(run_cli("simulate " + cfg + " -o " + (dir / "base").string()).code == 0);
  REQUIRE(run_cli("simulate " + cfg + " -o " + (dir / "over").string() +
                  " --seed 9 --horizon 30 --law balanced")
              .code == 0);

  const std::string manifest = slurp(dir / "over" / "manifest.json");
  CHECK(manifest.find("\"seed\": 9") != std::string::npos);
  CHECK(manifest.find("\"law\": \"balanced\"") != std::string::npos);

  std::ifstream traj(dir / "over" / "trajectory.csv");
  const TrajectoryData data = read_trajectory_csv(traj);
  CHECK(data.samples.back().t == doctest::Approx(30.0));
  CHECK(slurp(dir / "over" / "trajectory.csv") != slurp(dir / "base" / "trajectory.csv"));
  fs::remove_all(dir);
}

TEST_CASE("grouped runs append per-group verdicts") {
  const fs::path dir = make_temp_dir();
  REQUIRE(run_cli("simulate " + config("multigroup_2x4.json").string() + " -o " + dir.string())
              .code == 0);
  const std::string verdict = slurp(dir / "verdict.txt");

  // Two groups on distinct screws: no global equilibrium, one per group.
  CHECK(line_value(verdict, "kind") == "None");
  const std::size_t g1 = verdict.find("group_1:");
  const std::size_t g2 = verdict.find("group_2:");
  REQUIRE(g1 != std::string::npos);
  REQUIRE(g2 != std::string::npos);
  CHECK(verdict.find("  kind: Circular", g1) < g2);
  CHECK(verdict.find("  kind: Helical", g2) != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("bundled screw presets land on their commanded screws") {
  const fs::path dir = make_temp_dir();

  REQUIRE(run_cli("simulate " + config("glider.json").string() + " -o " + (dir / "g").string())
              .code == 0);
  std::string verdict = slurp(dir / "g" / "verdict.txt");
  CHECK(line_value(verdict, "kind") != "None");
  std::istringstream axis(line_value(verdict, "axis_direction"));
  double ax = 0.0, ay = 0.0, az = 0.0;
  axis >> ax >> ay >> az;
  CHECK(std::abs(az) == doctest::Approx(1.0).epsilon(1e-3));

  REQUIRE(run_cli("simulate " + config("helix_reference.json").string() + " -o " +
                  (dir / "h").string())
              .code == 0);
  verdict = slurp(dir / "h" / "verdict.txt");
  CHECK(line_value(verdict, "kind") == "Helical");
  CHECK(number_value(verdict, "pitch") == doctest::Approx(0.5).epsilon(1e-2));
  fs::remove_all(dir);
}

TEST_CASE("sweep tallies seeds and writes the summary table") {
  const fs::path dir = make_temp_dir();
  const CmdResult res = run_cli("sweep " + config("parallel_n10.json").string() +
                                " --count 3 --horizon 40 -o " + dir.string());
  CHECK(res.code == 0);
  CHECK(res.output.find("Parallel: 3/3") != std::string::npos);

  std::istringstream csv(slurp(dir / "sweep.csv"));
  std::string line;
  std::getline(csv, line);
  CHECK(line == "seed,kind,residual,pitch,xav_norm");
  int rows = 0;
  for (int seed = 1; std::getline(csv, line); ++rows, ++seed) {
    CHECK(line.rfind(std::to_string(seed) + ",Parallel,", 0) == 0);
  }
  CHECK(rows == 3);
  fs::remove_all(dir);
}

}  // TEST_SUITE
