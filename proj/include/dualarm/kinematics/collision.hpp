#pragma once

#include "dualarm/kinematics/forward_kinematics.hpp"

#include <algorithm>
#include <limits>
#include <vector>

namespace dualarm {

struct SegmentClosest {
  double distance = 0.0;
  Vec3 p1 = Vec3::Zero();  // on segment 1
  Vec3 p2 = Vec3::Zero();  // on segment 2
};

/// Closest points between segments [p1,q1] and [p2,q2] (Ericson, Real-Time Collision Detection 5.1.9).
inline SegmentClosest closest_segment_points(const Vec3& p1, const Vec3& q1, const Vec3& p2, const Vec3& q2) {
  constexpr double eps = 1e-14;
  const Vec3 d1 = q1 - p1;
  const Vec3 d2 = q2 - p2;
  const Vec3 r = p1 - p2;
  const double a = d1.squaredNorm();
  const double e = d2.squaredNorm();
  const double f = d2.dot(r);
  double s = 0.0;
  double t = 0.0;
  if (a <= eps && e <= eps) {
    s = t = 0.0;
  } else if (a <= eps) {
    t = std::clamp(f / e, 0.0, 1.0);
  } else {
    const double c = d1.dot(r);
    if (e <= eps) {
      s = std::clamp(-c / a, 0.0, 1.0);
    } else {
      const double b = d1.dot(d2);
      const double denom = a * e - b * b;
      s = denom > eps * a * e ? std::clamp((b * f - c * e) / denom, 0.0, 1.0) : 0.0;
      t = (b * s + f) / e;
      if (t < 0.0) {
        t = 0.0;
        s = std::clamp(-c / a, 0.0, 1.0);
      } else if (t > 1.0) {
        t = 1.0;
        s = std::clamp((b - c) / a, 0.0, 1.0);
      }
    }
  }
  SegmentClosest out;
  out.p1 = p1 + d1 * s;
  out.p2 = p2 + d2 * t;
  out.distance = (out.p1 - out.p2).norm();
  return out;
}

struct WorldCapsule {
  Vec3 a;
  Vec3 b;
  double radius = 0.0;
};

inline WorldCapsule world_capsule(const RobotModel& model, const KinematicState& s, int index) {
  const Capsule& c = model.capsules[index];
  const Pose T = c.owner == CapsuleOwner::Body ? Pose::identity() : s.arm(detail::owner_arm(c.owner)).link(c.link);
  return {T.apply(c.a), T.apply(c.b), c.radius};
}

/// Signed clearance of one collision pair with witness points on the capsule axes.
struct PairClearance {
  int pair = -1;
  int capsule_a = -1;
  int capsule_b = -1;
  double distance = std::numeric_limits<double>::infinity();  // negative = penetration
  Vec3 point_a = Vec3::Zero();
  Vec3 point_b = Vec3::Zero();
};

inline std::vector<PairClearance> pair_clearances(const RobotModel& model, const KinematicState& s) {
  std::vector<WorldCapsule> world;
  world.reserve(model.capsules.size());
  for (int i = 0; i < static_cast<int>(model.capsules.size()); ++i) world.push_back(world_capsule(model, s, i));
  std::vector<PairClearance> out;
  out.reserve(model.collision_pairs.size());
  for (int k = 0; k < static_cast<int>(model.collision_pairs.size()); ++k) {
    const auto [ia, ib] = model.collision_pairs[k];
    const SegmentClosest sc = closest_segment_points(world[ia].a, world[ia].b, world[ib].a, world[ib].b);
    out.push_back({k, ia, ib, sc.distance - world[ia].radius - world[ib].radius, sc.p1, sc.p2});
  }
  return out;
}

/// Minimum signed clearance over the collision pair list; +inf when the list is empty.
inline PairClearance min_clearance(const RobotModel& model, const KinematicState& s) {
  PairClearance best;
  for (const auto& pc : pair_clearances(model, s))
    if (pc.distance < best.distance) best = pc;
  return best;
}

inline PairClearance min_clearance(const RobotModel& model, const VecX& q) {
  return min_clearance(model, compute_state(model, q));
}

/// Gradient d(clearance)/dq of one pair, chained through witness-point Jacobians.
/// Zero when the axes intersect (direction undefined).
inline VecX clearance_gradient(const RobotModel& model, const KinematicState& s, const PairClearance& pc) {
  VecX g = VecX::Zero(model.dof());
  const Vec3 diff = pc.point_a - pc.point_b;
  const double len = diff.norm();
  if (len < 1e-12) return g;
  const Vec3 n = diff / len;
  const Capsule& ca = model.capsules[pc.capsule_a];
  const Capsule& cb = model.capsules[pc.capsule_b];
  if (ca.owner != CapsuleOwner::Body)
    g += (n.transpose() * point_jacobian(model, s, detail::owner_arm(ca.owner), ca.link, pc.point_a)).transpose();
  if (cb.owner != CapsuleOwner::Body)
    g -= (n.transpose() * point_jacobian(model, s, detail::owner_arm(cb.owner), cb.link, pc.point_b)).transpose();
  return g;
}

}  // namespace dualarm
