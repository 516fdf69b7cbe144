#include <screwsim/liegroup.hpp>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace screwsim {

namespace {

// Rodrigues coefficients A = sin(t)/t, B = (1-cos(t))/t^2, C = (t-sin(t))/t^3
// with series fallbacks accurate to below 1e-15 for t < kSmallAngle.
struct RotCoeffs {
  double A, B, C;
};

RotCoeffs rot_coeffs(double t) {
  const double t2 = t * t;
  if (t < kSmallAngle) {
    return {1.0 - t2 / 6.0 + t2 * t2 / 120.0,
            0.5 - t2 / 24.0 + t2 * t2 / 720.0,
            1.0 / 6.0 - t2 / 120.0 + t2 * t2 / 5040.0};
  }
  const double s = std::sin(t), c = std::cos(t);
  return {s / t, (1.0 - c) / t2, (t - s) / (t2 * t)};
}

}  // namespace

Mat3 hat3(const Vec3& v) {
  Mat3 H;
  H << 0.0, -v.z(), v.y(), v.z(), 0.0, -v.x(), -v.y(), v.x(), 0.0;
  return H;
}

Vec3 vee3(const Mat3& A) {
  if ((A + A.transpose()).norm() > kSkewTol) {
    throw std::invalid_argument("vee3: matrix is not skew-symmetric within tolerance");
  }
  return {A(2, 1), A(0, 2), A(1, 0)};
}

Mat3 exp_so3(const Vec3& omega, double h) {
  const Vec3 w = h * omega;
  const double t = w.norm();
  const RotCoeffs k = rot_coeffs(t);
  const Mat3 W = hat3(w);
  return Mat3::Identity() + k.A * W + k.B * W * W;
}

Pose exp_se3(const Twist& xi, double h) {
  const Vec3 w = h * xi.angular;
  const double t = w.norm();
  const RotCoeffs k = rot_coeffs(t);
  const Mat3 W = hat3(w);
  const Mat3 W2 = W * W;
  Pose g;
  g.R = Mat3::Identity() + k.A * W + k.B * W2;
  g.r = (Mat3::Identity() + k.B * W + k.C * W2) * (h * xi.linear);
  return g;
}

Mat6 adjoint(const Pose& g) {
  Mat6 Ad = Mat6::Zero();
  Ad.topLeftCorner<3, 3>() = g.R;
  Ad.bottomRightCorner<3, 3>() = g.R;
  Ad.topRightCorner<3, 3>() = hat3(g.r) * g.R;
  return Ad;
}

ScrewParams screw_of_twist(const Twist& xi) {
  const double wn = xi.angular.norm();
  const double vn = xi.linear.norm();
  if (wn == 0.0 && vn == 0.0) {
    throw std::invalid_argument("screw_of_twist: zero twist has no screw axis");
  }
  ScrewParams s;
  // Guard against denormal angular parts that would overflow the division;
  // anything this far below the linear scale is a translation in substance.
  if (wn <= 1e-12 * std::max(1.0, vn)) {
    s.pitch = std::numeric_limits<double>::infinity();
    s.axis_point = Vec3::Zero();
    s.axis_direction = xi.linear / vn;
    s.magnitude = vn;
    return s;
  }
  const double wn2 = wn * wn;
  s.pitch = xi.angular.dot(xi.linear) / wn2;
  s.axis_point = xi.angular.cross(xi.linear) / wn2;
  s.axis_direction = xi.angular / wn;
  s.magnitude = wn;
  return s;
}

bool is_rotation(const Mat3& R, double tol) {
  return ortho_error(R) <= tol && R.determinant() > 0.0;
}

double ortho_error(const Mat3& R) {
  return (R.transpose() * R - Mat3::Identity()).norm();
}

Pose compose(const Pose& a, const Pose& b) {
  return {a.R * b.R, a.R * b.r + a.r};
}

Pose inverse(const Pose& g) {
  return {g.R.transpose(), -(g.R.transpose() * g.r)};
}

Vec3 apply(const Pose& g, const Vec3& p) {
  return g.R * p + g.r;
}

Vec6 to_vec(const Twist& xi) {
  Vec6 x;
  x << xi.linear, xi.angular;
  return x;
}

Twist from_vec(const Vec6& x) {
  return {x.head<3>(), x.tail<3>()};
}

double line_distance(const Vec3& p1, const Vec3& d1, const Vec3& p2, const Vec3& d2) {
  const Vec3 u = d1.normalized();
  const Vec3 v = d2.normalized();
  const Vec3 n = u.cross(v);
  const Vec3 dp = p2 - p1;
  if (n.norm() < 1e-9) {
    return (dp - dp.dot(u) * u).norm();
  }
  return std::abs(dp.dot(n)) / n.norm();
}

}  // namespace screwsim
