#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace screwsim {

// Deterministic draws built directly on the mt19937_64 bit stream. The
// standard pins the engine's output sequence but not the distribution
// adaptors, so the mappings below are spelled out to keep runs reproducible
// across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  Eigen::Vector3d vec_in_box(const Eigen::Vector3d& lo, const Eigen::Vector3d& hi) {
    return {uniform(lo.x(), hi.x()), uniform(lo.y(), hi.y()), uniform(lo.z(), hi.z())};
  }

  // Uniform on SO(3) via a uniform unit quaternion (subgroup algorithm).
  Eigen::Matrix3d rotation() {
    const double u1 = uniform01(), u2 = uniform01(), u3 = uniform01();
    const double two_pi = 6.283185307179586476925286766559;
    const double a = std::sqrt(1.0 - u1), b = std::sqrt(u1);
    const Eigen::Quaterniond q(b * std::cos(two_pi * u3), a * std::sin(two_pi * u2),
                               a * std::cos(two_pi * u2), b * std::sin(two_pi * u3));
    return q.toRotationMatrix();
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace screwsim
