#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cmath>
#include <numbers>
#include <vector>

namespace dualarm {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Quat = Eigen::Quaterniond;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

inline constexpr double kPi = std::numbers::pi;

inline double deg2rad(double deg) { return deg * kPi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / kPi; }

/// Rigid transform: position in meters, unit quaternion (w,x,y,z).
struct Pose {
  Vec3 position = Vec3::Zero();
  Quat orientation = Quat::Identity();

  Pose() = default;
  Pose(const Vec3& p, const Quat& q) : position(p), orientation(q.normalized()) {}

  static Pose identity() { return {}; }
  static Pose translation(const Vec3& p) { return {p, Quat::Identity()}; }

  Mat3 rotation() const { return orientation.toRotationMatrix(); }

  Vec3 apply(const Vec3& p) const { return orientation * p + position; }

  Pose operator*(const Pose& rhs) const {
    return {orientation * rhs.position + position, orientation * rhs.orientation};
  }

  Pose inverse() const {
    const Quat inv = orientation.conjugate();
    return {-(inv * position), inv};
  }
};

/// Cross-product matrix [v]x.
inline Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(), v.z(), 0.0, -v.x(), -v.y(), v.x(), 0.0;
  return m;
}

/// Rotation vector (log map) of a unit quaternion, angle in [0, pi].
inline Vec3 log_map(const Quat& q_in) {
  Quat q = q_in.normalized();
  if (q.w() < 0.0) q.coeffs() = -q.coeffs();
  const Vec3 v = q.vec();
  const double s = v.norm();
  if (s < 1e-12) {
    // second-order accurate near identity
    return 2.0 * v / q.w();
  }
  const double angle = 2.0 * std::atan2(s, q.w());
  return v * (angle / s);
}

inline Quat exp_map(const Vec3& w) {
  const double angle = w.norm();
  if (angle < 1e-12) {
    Quat q(1.0, 0.5 * w.x(), 0.5 * w.y(), 0.5 * w.z());
    return q.normalized();
  }
  return Quat(Eigen::AngleAxisd(angle, w / angle));
}

/// Inverse of the SO(3) right Jacobian, evaluated at rotation vector phi.
inline Mat3 right_jacobian_inverse(const Vec3& phi) {
  const double theta = phi.norm();
  const Mat3 W = skew(phi);
  if (theta < 1e-6) {
    return Mat3::Identity() + 0.5 * W + (1.0 / 12.0) * W * W;
  }
  const double coef = 1.0 / (theta * theta) - (1.0 + std::cos(theta)) / (2.0 * theta * std::sin(theta));
  return Mat3::Identity() + 0.5 * W + coef * W * W;
}

/// Geodesic angle between two orientations, radians in [0, pi].
inline double geodesic_angle(const Quat& a, const Quat& b) {
  const Quat rel = a.normalized().conjugate() * b.normalized();
  // atan2 form stays accurate for tiny angles where acos loses precision
  return 2.0 * std::atan2(rel.vec().norm(), std::abs(rel.w()));
}

/// Shortest-arc spherical interpolation.
inline Quat slerp_shortest(const Quat& a, Quat b, double t) {
  if (a.dot(b) < 0.0) b.coeffs() = -b.coeffs();
  return a.slerp(t, b).normalized();
}

}  // namespace dualarm
