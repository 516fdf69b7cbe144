#pragma once

#include <Eigen/Dense>

namespace screwsim {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

// Shared numeric contracts. kSmallAngle is the Rodrigues/series switch on the
// rotation angle ||h * omega||; the tolerances bound what counts as a valid
// rotation (Frobenius) and a valid skew-symmetric matrix.
inline constexpr double kOrthoTol = 1e-9;
inline constexpr double kSkewTol = 1e-9;
inline constexpr double kSmallAngle = 1e-6;

struct Pose {
  Mat3 R = Mat3::Identity();
  Vec3 r = Vec3::Zero();
};

// Body twist of a rigid frame, stacked (linear, angular).
struct Twist {
  Vec3 linear = Vec3::Zero();
  Vec3 angular = Vec3::Zero();
};

// Canonical screw decomposition of a twist. For a rotation-bearing twist the
// axis passes through axis_point = omega x v / |omega|^2 with direction
// omega/|omega|; translation-only twists report infinite pitch, direction
// v/|v|, and an axis_point fixed at the origin. Axis equality must always be
// tested as line equality (see line_distance), never by comparing points.
struct ScrewParams {
  double pitch = 0.0;
  Vec3 axis_point = Vec3::Zero();
  Vec3 axis_direction = Vec3::Zero();
  double magnitude = 0.0;
};

Mat3 hat3(const Vec3& v);

// Inverse of hat3; throws std::invalid_argument when the input fails the
// skew-symmetry tolerance kSkewTol.
Vec3 vee3(const Mat3& A);

// exp(h * hat3(omega)): Rodrigues closed form, switching to a truncated series
// below kSmallAngle so both branches hold full precision.
Mat3 exp_so3(const Vec3& omega, double h);

// Rigid displacement reached by flowing along a frozen body twist for time h.
Pose exp_se3(const Twist& xi, double h);

// 6x6 matrix mapping body twists to spatial twists: [[R, hat(r) R], [0, R]].
Mat6 adjoint(const Pose& g);

// Throws std::invalid_argument on the zero twist.
ScrewParams screw_of_twist(const Twist& xi);

bool is_rotation(const Mat3& R, double tol = kOrthoTol);
double ortho_error(const Mat3& R);

Pose compose(const Pose& a, const Pose& b);
Pose inverse(const Pose& g);
Vec3 apply(const Pose& g, const Vec3& p);

Vec6 to_vec(const Twist& xi);
Twist from_vec(const Vec6& x);

// Distance between two lines given by (point, direction); directions need not
// be normalized. Nearly parallel pairs fall back to the perpendicular offset.
double line_distance(const Vec3& p1, const Vec3& d1, const Vec3& p2, const Vec3& d2);

}  // namespace screwsim
