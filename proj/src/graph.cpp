#include <screwsim/graph.hpp>

#include <screwsim/errors.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace screwsim {

namespace {

// Overlaps shorter than this are treated as empty so that windows landing a
// rounding error past a segment boundary do not invent edges.
constexpr double kOverlapFloor = 1e-12;

void validate_snapshot(const GraphSnapshot& g, double eta, double gamma) {
  if (g.weights.rows() != g.n || g.weights.cols() != g.n) {
    throw SchemaError("graph snapshot: weight matrix shape does not match node count");
  }
  for (int i = 0; i < g.n; ++i) {
    if (g.weights(i, i) != 0.0) throw SchemaError("graph snapshot: self-cycle weight");
    for (int j = 0; j < g.n; ++j) {
      const double w = g.weights(i, j);
      if (w < 0.0) throw SchemaError("graph snapshot: negative weight");
      if (w > 0.0 && (w < eta - 1e-12 || w > gamma + 1e-12)) {
        throw SchemaError("graph snapshot: nonzero weight outside [eta, gamma]");
      }
    }
  }
}

// Integral over [t0, t1] with both endpoints inside the base coverage.
Eigen::MatrixXd integrate_covered(const GraphSchedule& s, double t0, double t1) {
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(s.n, s.n);
  for (const auto& seg : s.segments) {
    const double lo = std::max(t0, seg.t_start);
    const double hi = std::min(t1, seg.t_end);
    if (hi - lo > kOverlapFloor) acc += (hi - lo) * seg.graph.weights;
  }
  return acc;
}

// Node set from which the fixed candidate c (0-based) is reachable along
// edges (k -> j), i.e. paths respecting the listening orientation.
bool all_reach(const Eigen::MatrixXd& u, int c) {
  const int n = static_cast<int>(u.rows());
  std::vector<bool> reached(static_cast<size_t>(n), false);
  std::vector<int> stack{c};
  reached[static_cast<size_t>(c)] = true;
  // Walk edges backwards: k reaches c if k -> j and j reaches c.
  while (!stack.empty()) {
    const int j = stack.back();
    stack.pop_back();
    for (int k = 0; k < n; ++k) {
      if (!reached[static_cast<size_t>(k)] && u(k, j) > 0.0) {
        reached[static_cast<size_t>(k)] = true;
        stack.push_back(k);
      }
    }
  }
  return std::all_of(reached.begin(), reached.end(), [](bool v) { return v; });
}

}  // namespace

const GraphSnapshot& GraphSchedule::at(double t) const {
  double tau = t;
  if (period) {
    tau = std::fmod(t, *period);
    if (tau < 0.0) tau += *period;
  }
  for (const auto& seg : segments) {
    if (tau >= seg.t_start && tau < seg.t_end) return seg.graph;
  }
  if (!segments.empty() && tau == segments.back().t_end) return segments.back().graph;
  throw SchemaError("graph schedule: time outside covered range");
}

Eigen::MatrixXd laplacian(const GraphSnapshot& g) {
  Eigen::MatrixXd L = -g.weights;
  for (int k = 0; k < g.n; ++k) {
    // Sequential accumulation pins the rounding, so the diagonal equals the
    // off-diagonal total bit-for-bit.
    double total = 0.0;
    for (int j = 0; j < g.n; ++j) total += g.weights(k, j);
    L(k, k) = total;
  }
  return L;
}

bool is_balanced(const GraphSnapshot& g, double tol) {
  for (int k = 0; k < g.n; ++k) {
    if (std::abs(g.weights.row(k).sum() - g.weights.col(k).sum()) > tol) return false;
  }
  return true;
}

Eigen::MatrixXd integrate_adjacency(const GraphSchedule& s, double t0, double t1) {
  if (t1 < t0) throw SchemaError("integrate_adjacency: reversed interval");
  if (!s.period) {
    if (t0 < -kOverlapFloor || t1 > s.span() + kOverlapFloor) {
      throw SchemaError("integrate_adjacency: interval outside schedule coverage");
    }
    return integrate_covered(s, std::max(t0, 0.0), std::min(t1, s.span()));
  }
  const double P = *s.period;
  if (t0 < -kOverlapFloor) throw SchemaError("integrate_adjacency: negative start time");
  // Whole periods plus wrapped remainder.
  const double len = t1 - t0;
  const double full = std::floor(len / P + kOverlapFloor);
  Eigen::MatrixXd acc = full * integrate_covered(s, 0.0, P);
  const double rem = len - full * P;
  if (rem > kOverlapFloor) {
    double a = std::fmod(t0, P);
    if (a < 0.0) a += P;
    const double b = a + rem;
    if (b <= P + kOverlapFloor) {
      acc += integrate_covered(s, a, std::min(b, P));
    } else {
      acc += integrate_covered(s, a, P) + integrate_covered(s, 0.0, b - P);
    }
  }
  return acc;
}

ConnectivityReport is_uniformly_connected(const GraphSchedule& s, double T) {
  if (T <= 0.0) throw SchemaError("is_uniformly_connected: window length must be positive");
  ConnectivityReport report;
  report.horizon_T = T;
  report.certified_horizon =
      s.period ? std::numeric_limits<double>::infinity() : s.span();

  // Union-graph edge sets can only change at segment boundaries, and as the
  // anchor slides right inside one segment the windowed edge set only grows,
  // so boundary-anchored windows realize every per-interval minimum.
  std::vector<double> anchors{0.0};
  const double wrap = s.period ? *s.period : s.span();
  for (const auto& seg : s.segments) {
    if (seg.t_start > 0.0 && seg.t_start < wrap) anchors.push_back(seg.t_start);
  }

  std::vector<bool> roots(static_cast<size_t>(s.n), true);
  bool any_window = false;
  for (double a : anchors) {
    if (!s.period && a + T > s.span() + kOverlapFloor) continue;
    any_window = true;
    const Eigen::MatrixXd u = integrate_adjacency(s, a, a + T);
    for (int c = 0; c < s.n; ++c) {
      if (roots[static_cast<size_t>(c)] && !all_reach(u, c)) {
        roots[static_cast<size_t>(c)] = false;
      }
    }
    // First window at which no candidate root survives the intersection.
    const bool still_possible =
        std::any_of(roots.begin(), roots.end(), [](bool v) { return v; });
    if (!still_possible && !report.failing_window) {
      report.failing_window = {a, a + T};
    }
  }
  if (!any_window) {
    throw SchemaError("is_uniformly_connected: window length exceeds schedule span");
  }

  for (int c = 0; c < s.n; ++c) {
    if (roots[static_cast<size_t>(c)]) {
      report.uniformly_connected = true;
      report.witness_root = c + 1;
      break;
    }
  }
  return report;
}

namespace {

GraphSchedule schedule_from_json(const nlohmann::json& j) {
  GraphSchedule s;
  if (!j.is_object()) throw SchemaError("graph schedule: top level must be an object");
  for (const char* field : {"n", "eta", "gamma", "segments"}) {
    if (!j.contains(field)) {
      throw SchemaError(std::string("graph schedule: missing field '") + field + "'");
    }
  }
  s.n = j.at("n").get<int>();
  s.eta = j.at("eta").get<double>();
  s.gamma = j.at("gamma").get<double>();
  if (s.n < 1) throw SchemaError("graph schedule: n must be at least 1");
  if (s.eta <= 0.0) throw SchemaError("graph schedule: eta must be positive");
  if (s.gamma < s.eta) throw SchemaError("graph schedule: gamma must be at least eta");
  if (j.contains("periodic")) {
    const double p = j.at("periodic").get<double>();
    if (p <= 0.0) throw SchemaError("graph schedule: period must be positive");
    s.period = p;
  }

  double cursor = 0.0;
  for (const auto& jseg : j.at("segments")) {
    GraphSegment seg;
    seg.t_start = jseg.at("t_start").get<double>();
    seg.t_end = jseg.at("t_end").get<double>();
    if (std::abs(seg.t_start - cursor) > 1e-9) {
      throw SchemaError("graph schedule: segments must be contiguous from t = 0");
    }
    if (seg.t_end <= seg.t_start) throw SchemaError("graph schedule: empty or reversed segment");
    seg.graph.n = s.n;
    seg.graph.weights = Eigen::MatrixXd::Zero(s.n, s.n);
    for (const auto& je : jseg.at("edges")) {
      const int from = je.at("from").get<int>();
      const int to = je.at("to").get<int>();
      if (from < 1 || from > s.n || to < 1 || to > s.n) {
        throw SchemaError("graph schedule: edge endpoint outside 1..n");
      }
      if (from == to) throw SchemaError("graph schedule: self-cycle edge");
      const double w = je.contains("weight") ? je.at("weight").get<double>() : s.eta;
      seg.graph.weights(from - 1, to - 1) = w;
    }
    validate_snapshot(seg.graph, s.eta, s.gamma);
    s.segments.push_back(seg);
    cursor = seg.t_end;
  }
  if (s.segments.empty()) throw SchemaError("graph schedule: at least one segment required");
  if (s.period && std::abs(cursor - *s.period) > 1e-9) {
    throw SchemaError("graph schedule: periodic segments must cover exactly one period");
  }
  return s;
}

}  // namespace

GraphSchedule parse_schedule(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("graph schedule: invalid JSON: ") + e.what());
  }
  try {
    return schedule_from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("graph schedule: ") + e.what());
  }
}

GraphSchedule load_schedule(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("graph schedule: cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_schedule(buf.str());
}

}  // namespace screwsim
