#pragma once

#include "dualarm/kinematics/robot_model.hpp"

#include <array>
#include <string>
#include <vector>

namespace dualarm {

/// World poses of every link of one arm, plus joint axes/origins for Jacobians.
struct ArmState {
  Pose base;
  std::vector<Pose> links;   // link frame after joint i's rotation
  std::vector<Vec3> axes;    // joint axes in the world frame
  std::vector<Vec3> origins; // joint origins in the world frame

  const Pose& link(int i) const { return i < 0 ? base : links[i]; }
};

struct KinematicState {
  std::array<ArmState, 2> arms;
  std::array<Pose, kFrameCount> frames;

  const ArmState& arm(Arm a) const { return arms[static_cast<int>(a)]; }
  const Pose& operator[](FrameId id) const { return frames[static_cast<int>(id)]; }
};

using FrameMap = std::array<Pose, kFrameCount>;

inline FrameId parse_frame_id(const std::string& text) {
  for (int i = 0; i < kFrameCount; ++i)
    if (text == to_string(static_cast<FrameId>(i))) return static_cast<FrameId>(i);
  throw DimensionError("unknown frame id '" + text + "'");
}

inline void check_dof(const RobotModel& model, const VecX& q) {
  if (q.size() != model.dof())
    throw DimensionError("joint vector has " + std::to_string(q.size()) + " entries, robot has " +
                         std::to_string(model.dof()) + " joints");
  if (!q.allFinite()) throw DimensionError("joint vector contains non-finite values");
}

inline KinematicState compute_state(const RobotModel& model, const VecX& q) {
  check_dof(model, q);
  KinematicState s;
  for (Arm arm : {Arm::Left, Arm::Right}) {
    const KinematicChain& chain = model.chain(arm);
    ArmState& as = s.arms[static_cast<int>(arm)];
    as.base = model.base(arm);
    const int off = model.offset(arm);
    Pose T = as.base;
    as.links.reserve(chain.joints.size());
    for (int i = 0; i < chain.dof(); ++i) {
      const Joint& j = chain.joints[i];
      T = T * j.origin;
      as.origins.push_back(T.position);
      as.axes.push_back(T.orientation * j.axis);
      T = T * Pose(Vec3::Zero(), Quat(Eigen::AngleAxisd(q[off + i], j.axis)));
      as.links.push_back(T);
    }
    for (int f = 0; f < 4; ++f) {
      const NamedFrame& nf = chain.frames[f];
      s.frames[static_cast<int>(arm) * 4 + f] = as.link(nf.joint) * nf.offset;
    }
  }
  return s;
}

/// Poses of LS, LE, LW, L_tip, RS, RE, RW, R_tip in the common base frame.
inline FrameMap forward_kinematics(const RobotModel& model, const VecX& q) { return compute_state(model, q).frames; }

/// 3 x dof linear Jacobian of a world point rigidly attached to `link` of `arm`.
inline MatX point_jacobian(const RobotModel& model, const KinematicState& s, Arm arm, int link, const Vec3& p) {
  MatX J = MatX::Zero(3, model.dof());
  const ArmState& as = s.arm(arm);
  const int off = model.offset(arm);
  for (int j = 0; j <= link; ++j) J.col(off + j) = as.axes[j].cross(p - as.origins[j]);
  return J;
}

/// 6 x dof geometric Jacobian of a named frame: rows 0-2 linear (m/rad), rows 3-5 angular (rad/rad).
inline MatX frame_jacobian(const RobotModel& model, const KinematicState& s, FrameId frame) {
  if (static_cast<int>(frame) < 0 || static_cast<int>(frame) >= kFrameCount)
    throw DimensionError("unknown frame id " + std::to_string(static_cast<int>(frame)));
  const Arm arm = arm_of(frame);
  const int link = model.chain(arm).frame(name_of(frame)).joint;
  const Vec3 p = s[frame].position;
  MatX J = MatX::Zero(6, model.dof());
  const ArmState& as = s.arm(arm);
  const int off = model.offset(arm);
  for (int j = 0; j <= link; ++j) {
    J.block<3, 1>(0, off + j) = as.axes[j].cross(p - as.origins[j]);
    J.block<3, 1>(3, off + j) = as.axes[j];
  }
  return J;
}

inline MatX frame_jacobian(const RobotModel& model, const VecX& q, FrameId frame) {
  return frame_jacobian(model, compute_state(model, q), frame);
}

}  // namespace dualarm
