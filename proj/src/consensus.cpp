#include <screwsim/consensus.hpp>

#include <cmath>
#include <stdexcept>

namespace screwsim {

std::vector<Eigen::VectorXd> consensus_derivative(const ConsensusEnsemble& e,
                                                  const Eigen::MatrixXd& L) {
  const int n = e.size();
  if (L.rows() != n || L.cols() != n)
    throw std::invalid_argument("consensus_derivative: Laplacian is " +
                                std::to_string(L.rows()) + "x" +
                                std::to_string(L.cols()) + " for " +
                                std::to_string(n) + " agents");
  std::vector<Eigen::VectorXd> out;
  out.reserve(n);
  for (int k = 0; k < n; ++k) {
    Eigen::VectorXd d = Eigen::VectorXd::Zero(e.values[k].size());
    for (int j = 0; j < n; ++j) {
      if (e.values[j].size() != e.values[k].size())
        throw std::invalid_argument("consensus_derivative: mixed value dimensions");
      d -= L(k, j) * e.values[j];
    }
    out.push_back(std::move(d));
  }
  return out;
}

double disagreement(const ConsensusEnsemble& e) {
  if (e.values.empty()) return 0.0;
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(e.values.front().size());
  for (const auto& v : e.values) mean += v;
  mean /= static_cast<double>(e.size());
  double total = 0.0;
  for (const auto& v : e.values) total += (v - mean).squaredNorm();
  return total;
}

std::vector<Vec3> body_frame_consensus_derivative(const std::vector<Vec3>& values,
                                                  const std::vector<Mat3>& rotations,
                                                  const std::vector<Vec3>& controls,
                                                  const Eigen::MatrixXd& L) {
  const int n = static_cast<int>(values.size());
  if (static_cast<int>(rotations.size()) != n ||
      static_cast<int>(controls.size()) != n || L.rows() != n || L.cols() != n)
    throw std::invalid_argument("body_frame_consensus_derivative: size mismatch");
  std::vector<Vec3> out;
  out.reserve(n);
  for (int k = 0; k < n; ++k) {
    Vec3 d = hat3(controls[k]).transpose() * values[k];
    for (int j = 0; j < n; ++j)
      d -= L(k, j) * (rotations[k].transpose() * (rotations[j] * values[j]));
    out.push_back(d);
  }
  return out;
}

ConsensusEnsemble integrate_consensus(
    ConsensusEnsemble e, const GraphSchedule& schedule, double h, double horizon,
    const std::function<void(const ConsensusEnsemble&)>& observer) {
  if (h <= 0.0) throw std::invalid_argument("integrate_consensus: h must be positive");
  const long steps = static_cast<long>(std::llround(horizon / h));
  for (long m = 0; m < steps; ++m) {
    const double t = e.time;
    const Eigen::MatrixXd L = laplacian(schedule.at(t));
    const auto d = consensus_derivative(e, L);
    for (int k = 0; k < e.size(); ++k) e.values[k] += h * d[k];
    e.time = t + h;
    if (observer) observer(e);
  }
  return e;
}

}  // namespace screwsim
