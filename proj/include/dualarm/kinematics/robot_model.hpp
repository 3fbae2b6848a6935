#pragma once

#include "dualarm/core/error.hpp"
#include "dualarm/core/types.hpp"

#include <algorithm>
#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace dualarm {

enum class Arm { Left = 0, Right = 1 };

/// Named frames every arm exposes to the retargeter.
enum class FrameName { Shoulder = 0, Elbow = 1, Wrist = 2, HandTip = 3 };

/// Frames of the dual-arm robot in the common base frame.
enum class FrameId { LS = 0, LE, LW, LTip, RS, RE, RW, RTip };

inline constexpr int kFrameCount = 8;

inline constexpr FrameId frame_id(Arm arm, FrameName name) {
  return static_cast<FrameId>(static_cast<int>(arm) * 4 + static_cast<int>(name));
}
inline constexpr Arm arm_of(FrameId id) { return static_cast<int>(id) < 4 ? Arm::Left : Arm::Right; }
inline constexpr FrameName name_of(FrameId id) { return static_cast<FrameName>(static_cast<int>(id) % 4); }

inline const char* to_string(FrameId id) {
  static constexpr std::array<const char*, kFrameCount> names = {"LS", "LE", "LW", "L_tip",
                                                                 "RS", "RE", "RW", "R_tip"};
  return names[static_cast<int>(id)];
}

struct Joint {
  std::string name;
  Pose origin;  // fixed transform from the parent link frame
  Vec3 axis = Vec3::UnitZ();
  double limit_min = -kPi;
  double limit_max = kPi;
};

/// A frame rigidly attached to the link of `joint` (after its rotation). joint = -1 is the arm base.
struct NamedFrame {
  int joint = -1;
  Pose offset;
};

struct KinematicChain {
  std::vector<Joint> joints;
  std::array<NamedFrame, 4> frames{};  // indexed by FrameName

  int dof() const { return static_cast<int>(joints.size()); }
  bool empty() const { return joints.empty(); }
  const NamedFrame& frame(FrameName n) const { return frames[static_cast<int>(n)]; }
};

enum class CapsuleOwner { Left = 0, Right = 1, Body = 2 };

/// Capsule = segment [a, b] in the owning link frame inflated by radius.
struct Capsule {
  std::string name;
  CapsuleOwner owner = CapsuleOwner::Body;
  int link = -1;  // joint index on the owner's chain; -1 = arm base / body
  Vec3 a = Vec3::Zero();
  Vec3 b = Vec3::Zero();
  double radius = 0.0;
};

struct FingerJoint {
  std::string name;
  double limit_min = 0.0;
  double limit_max = 0.0;
};

struct RobotModel {
  std::string name;
  KinematicChain left;
  KinematicChain right;
  Pose left_base;
  Pose right_base;
  double hand_length = 0.0;
  std::vector<Capsule> capsules;
  std::vector<std::pair<int, int>> collision_pairs;
  std::vector<FingerJoint> left_fingers;
  std::vector<FingerJoint> right_fingers;

  const KinematicChain& chain(Arm arm) const { return arm == Arm::Left ? left : right; }
  const Pose& base(Arm arm) const { return arm == Arm::Left ? left_base : right_base; }

  int dof() const { return left.dof() + right.dof(); }
  /// Column offset of the arm's first joint in the stacked joint vector [left, right].
  int offset(Arm arm) const { return arm == Arm::Left ? 0 : left.dof(); }

  std::optional<int> capsule_index(const std::string& capsule_name) const {
    for (std::size_t i = 0; i < capsules.size(); ++i)
      if (capsules[i].name == capsule_name) return static_cast<int>(i);
    return std::nullopt;
  }

  VecX lower_limits() const {
    VecX lo(dof());
    for (int i = 0; i < left.dof(); ++i) lo[i] = left.joints[i].limit_min;
    for (int i = 0; i < right.dof(); ++i) lo[left.dof() + i] = right.joints[i].limit_min;
    return lo;
  }
  VecX upper_limits() const {
    VecX hi(dof());
    for (int i = 0; i < left.dof(); ++i) hi[i] = left.joints[i].limit_max;
    for (int i = 0; i < right.dof(); ++i) hi[left.dof() + i] = right.joints[i].limit_max;
    return hi;
  }
  VecX clamp_to_limits(const VecX& q) const { return q.cwiseMax(lower_limits()).cwiseMin(upper_limits()); }
};

namespace detail {

inline Arm owner_arm(CapsuleOwner o) { return o == CapsuleOwner::Left ? Arm::Left : Arm::Right; }

inline void validate_chain(const KinematicChain& chain, const std::string& tag) {
  if (chain.empty()) return;
  for (std::size_t i = 0; i < chain.joints.size(); ++i) {
    const Joint& j = chain.joints[i];
    const std::string locus = tag + ".joints[" + std::to_string(i) + "]";
    if (!(j.limit_min < j.limit_max))
      throw InvariantError(locus + ".limits: degenerate joint limit (limit_min must be < limit_max)");
    if (!j.axis.allFinite() || std::abs(j.axis.norm() - 1.0) > 1e-6)
      throw InvariantError(locus + ".axis: rotation axis must be a unit vector");
  }
  const int n = chain.dof();
  for (int f = 0; f < 4; ++f) {
    const int idx = chain.frames[f].joint;
    if (idx < -1 || idx >= n)
      throw InvariantError(tag + ".frames: frame joint index " + std::to_string(idx) + " out of range");
  }
  const int e = chain.frame(FrameName::Elbow).joint;
  const int w = chain.frame(FrameName::Wrist).joint;
  const int t = chain.frame(FrameName::HandTip).joint;
  // hand tip usually rides on the last wrist link, so it may share the wrist's index
  if (!(e < w && w <= t))
    throw InvariantError(tag + ".frames: kinematic ordering requires elbow < wrist <= hand_tip");
}

/// Capsules on the same arm are adjacent when no other capsule of that arm sits on a link between them;
/// body capsules are adjacent to each arm's first capsule.
inline bool capsules_adjacent(const RobotModel& m, int ia, int ib) {
  const Capsule& a = m.capsules[ia];
  const Capsule& b = m.capsules[ib];
  auto first_link = [&](CapsuleOwner owner) {
    int best = 1 << 30;
    for (const auto& c : m.capsules)
      if (c.owner == owner) best = std::min(best, c.link);
    return best;
  };
  if (a.owner == CapsuleOwner::Body && b.owner == CapsuleOwner::Body) return true;
  if (a.owner == CapsuleOwner::Body) return b.link == first_link(b.owner);
  if (b.owner == CapsuleOwner::Body) return a.link == first_link(a.owner);
  if (a.owner != b.owner) return false;
  const int lo = std::min(a.link, b.link);
  const int hi = std::max(a.link, b.link);
  for (const auto& c : m.capsules)
    if (c.owner == a.owner && c.link > lo && c.link < hi) return false;
  return true;
}

}  // namespace detail

/// Throws InvariantError naming the first failing field.
inline void validate(const RobotModel& m) {
  detail::validate_chain(m.left, "arms.left");
  detail::validate_chain(m.right, "arms.right");
  if (m.left.empty() && m.right.empty()) throw InvariantError("arms: model has no joints");
  if (!(m.hand_length >= 0.0)) throw InvariantError("hand_length: must be >= 0");
  for (std::size_t i = 0; i < m.capsules.size(); ++i) {
    const Capsule& c = m.capsules[i];
    const std::string locus = "capsules[" + std::to_string(i) + "]";
    if (!(c.radius > 0.0)) throw InvariantError(locus + ".radius: capsule radius must be > 0");
    if (c.owner != CapsuleOwner::Body) {
      const auto& chain = m.chain(detail::owner_arm(c.owner));
      if (c.link < -1 || c.link >= chain.dof())
        throw InvariantError(locus + ".link: link index out of range");
    } else if (c.link != -1) {
      throw InvariantError(locus + ".link: body capsules must use link -1");
    }
  }
  for (std::size_t i = 0; i < m.collision_pairs.size(); ++i) {
    const auto [a, b] = m.collision_pairs[i];
    const std::string locus = "collision_pairs[" + std::to_string(i) + "]";
    const int nc = static_cast<int>(m.capsules.size());
    if (a < 0 || b < 0 || a >= nc || b >= nc) throw InvariantError(locus + ": unknown capsule");
    if (a == b) throw InvariantError(locus + ": pair references the same capsule twice");
    const Capsule& ca = m.capsules[a];
    const Capsule& cb = m.capsules[b];
    if (ca.owner == cb.owner && ca.link == cb.link)
      throw InvariantError(locus + ": capsules '" + ca.name + "' and '" + cb.name + "' are on the same link");
    if (detail::capsules_adjacent(m, a, b))
      throw InvariantError(locus + ": capsules '" + ca.name + "' and '" + cb.name +
                           "' are on kinematically adjacent links");
  }
  for (const auto* fingers : {&m.left_fingers, &m.right_fingers})
    for (const auto& f : *fingers)
      if (!(f.limit_min < f.limit_max)) throw InvariantError("fingers." + f.name + ": degenerate finger range");
}

/// Rows >= 2, strictly increasing timestamps, one column per robot joint.
struct JointTrajectory {
  MatX q;  // (N+1) x dof
  std::vector<double> timestamps;

  int steps() const { return static_cast<int>(q.rows()); }
  VecX row(int n) const { return q.row(n).transpose(); }
};

inline void validate(const JointTrajectory& traj, int dof) {
  if (traj.q.rows() < 2) throw InvariantError("joint trajectory: needs at least 2 rows");
  if (traj.q.cols() != dof)
    throw InvariantError("joint trajectory: column count " + std::to_string(traj.q.cols()) +
                         " does not match robot dof " + std::to_string(dof));
  if (static_cast<Eigen::Index>(traj.timestamps.size()) != traj.q.rows())
    throw InvariantError("joint trajectory: timestamp count does not match row count");
  for (std::size_t i = 1; i < traj.timestamps.size(); ++i)
    if (!(traj.timestamps[i] > traj.timestamps[i - 1]))
      throw InvariantError("joint trajectory: timestamps must be strictly increasing");
}

}  // namespace dualarm
