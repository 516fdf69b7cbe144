#pragma once

#include <screwsim/graph.hpp>
#include <screwsim/liegroup.hpp>

#include <Eigen/Dense>
#include <functional>
#include <vector>

namespace screwsim {

// Stacked agreement variables p_1..p_N, all of one dimension.
struct ConsensusEnsemble {
  std::vector<Eigen::VectorXd> values;
  double time = 0.0;

  int size() const { return static_cast<int>(values.size()); }
};

// Laplacian flow p_dot_k = -sum_j L_kj p_j (equivalently sum_j a_kj (p_j - p_k)).
// Throws std::invalid_argument when L is not N x N for the ensemble.
std::vector<Eigen::VectorXd> consensus_derivative(const ConsensusEnsemble& e,
                                                  const Eigen::MatrixXd& L);

// Sum of squared deviations from the ensemble mean.
double disagreement(const ConsensusEnsemble& e);

// Derivative of body-frame estimates b_k carried by agents whose frames rotate
// as R_dot_k = R_k hat(u_k): b_dot_k = hat(u_k)^T b_k - sum_j L_kj R_k^T R_j b_j.
// The images R_k b_k then follow the plain Laplacian flow on spatial values.
std::vector<Vec3> body_frame_consensus_derivative(const std::vector<Vec3>& values,
                                                  const std::vector<Mat3>& rotations,
                                                  const std::vector<Vec3>& controls,
                                                  const Eigen::MatrixXd& L);

// Explicit first-order integration of the Laplacian flow over a schedule,
// matching the simulation engine's update order. The observer, when given,
// runs after every step.
ConsensusEnsemble integrate_consensus(
    ConsensusEnsemble e, const GraphSchedule& schedule, double h, double horizon,
    const std::function<void(const ConsensusEnsemble&)>& observer = {});

}  // namespace screwsim
