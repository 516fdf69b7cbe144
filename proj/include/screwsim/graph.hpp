#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace screwsim {

// Weighted digraph at one instant. Entry weights(k, j) > 0 means node k
// receives information from node j; the same orientation defines the union
// edge (k -> j) used by the connectivity certifier.
struct GraphSnapshot {
  int n = 0;
  Eigen::MatrixXd weights;
};

struct GraphSegment {
  double t_start = 0.0;
  double t_end = 0.0;
  GraphSnapshot graph;
};

// Piecewise-constant schedule starting at t = 0. Nonzero weights lie in
// [eta, gamma]. A declared period makes the schedule repeat forever and
// upgrades connectivity certificates to an infinite horizon.
struct GraphSchedule {
  int n = 0;
  double eta = 0.0;
  double gamma = 0.0;
  std::vector<GraphSegment> segments;
  std::optional<double> period;

  double span() const { return segments.empty() ? 0.0 : segments.back().t_end; }

  // Snapshot active at time t (periodic schedules wrap). Throws SchemaError
  // outside the covered range of an aperiodic schedule.
  const GraphSnapshot& at(double t) const;
};

struct ConnectivityReport {
  bool uniformly_connected = false;
  std::optional<int> witness_root;  // 1-based node id
  double horizon_T = 0.0;
  std::optional<std::pair<double, double>> failing_window;
  double certified_horizon = 0.0;  // +inf when the schedule is periodic
};

// Row k: diagonal holds the total weight node k applies, off-diagonal the
// negated weights, so every row sums to zero.
Eigen::MatrixXd laplacian(const GraphSnapshot& g);

// True iff every node's in-weight equals its out-weight within tol.
bool is_balanced(const GraphSnapshot& g, double tol = 1e-12);

// Exact piecewise-constant integral of the adjacency over [t0, t1].
Eigen::MatrixXd integrate_adjacency(const GraphSchedule& s, double t0, double t1);

// Certifies that one fixed node is reachable from all others in the union
// graph of every window [t, t+T] anchored at a segment boundary (plus t=0).
// Throws SchemaError when T exceeds the span of an aperiodic schedule.
ConnectivityReport is_uniformly_connected(const GraphSchedule& s, double T);

GraphSchedule parse_schedule(const std::string& json_text);
GraphSchedule load_schedule(const std::string& path);

}  // namespace screwsim
