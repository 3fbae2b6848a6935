#pragma once

#include "dualarm/coordination/coordination.hpp"
#include "dualarm/kinematics/collision.hpp"
#include "dualarm/kinematics/forward_kinematics.hpp"

#include <array>
#include <vector>

namespace dualarm {

/// Per-step Cartesian targets for wrists (pose) and elbows (position).
struct StepTargets {
  Vec3 LW, RW, LE, RE;
  Quat R_LW, R_RW;
};

struct ReferenceTargets {
  std::vector<StepTargets> steps;
  std::vector<double> timestamps;

  int size() const { return static_cast<int>(steps.size()); }
  const StepTargets& operator[](int n) const { return steps[n]; }
};

inline ReferenceTargets targets_from(const ReferenceSet& r) {
  ReferenceTargets t;
  const int n = r.size();
  if (r.LW.size() != n || r.LE.size() != n || r.RE.size() != n || static_cast<int>(r.R_LW.size()) != n ||
      static_cast<int>(r.R_RW.size()) != n)
    throw DimensionError("reference set: channel lengths differ");
  t.steps.resize(n);
  t.timestamps = r.RW.timestamps;
  for (int i = 0; i < n; ++i) t.steps[i] = {r.LW[i], r.RW[i], r.LE[i], r.RE[i], r.R_LW[i], r.R_RW[i]};
  return t;
}

/// Targets that a configuration trajectory meets exactly (its own FK).
inline StepTargets targets_from_fk(const FrameMap& f) {
  auto at = [&](FrameId id) { return f[static_cast<int>(id)]; };
  return {at(FrameId::LW).position, at(FrameId::RW).position, at(FrameId::LE).position,
          at(FrameId::RE).position, at(FrameId::LW).orientation, at(FrameId::RW).orientation};
}

struct CostWeights {
  double w_wrist_pos = 1.0;
  double w_wrist_ori = 0.05;
  double w_elbow_pos = 1e-3;
  double w_col = 100.0;
  double w_smooth = 1e-4;
  double w_limit = 1e3;
  double d_safe = 0.02;
};

inline void validate(const CostWeights& w) {
  for (double v : {w.w_wrist_pos, w.w_wrist_ori, w.w_elbow_pos, w.w_col, w.w_smooth, w.w_limit})
    if (!(v >= 0.0)) throw InvariantError("cost weights must be >= 0");
  if (!(w.d_safe > 0.0)) throw InvariantError("d_safe must be > 0");
}

/// Residual block and its Jacobian with respect to one joint vector.
struct Linearized {
  VecX r;
  MatX J;
};

inline constexpr int kTrackingRows = 18;  // 6 per wrist + 3 per elbow

/// Orientation error rotation-vector log(R_target^-1 R) and its Jacobian given the frame's angular Jacobian.
inline Vec3 orientation_error(const Quat& target, const Quat& actual) { return log_map(target.conjugate() * actual); }

inline MatX orientation_error_jacobian(const Vec3& e, const Quat& actual, const MatX& J_ang) {
  return right_jacobian_inverse(e) * actual.toRotationMatrix().transpose() * J_ang;
}

/// Rows: [LW pos, LW ori, RW pos, RW ori, LE pos, RE pos], each block scaled by sqrt(weight).
inline Linearized tracking_residual(const RobotModel& m, const KinematicState& s, const StepTargets& t,
                                    const CostWeights& w, bool with_jacobian = true) {
  Linearized out;
  out.r.resize(kTrackingRows);
  if (with_jacobian) out.J = MatX::Zero(kTrackingRows, m.dof());
  const double sp = std::sqrt(w.w_wrist_pos), so = std::sqrt(w.w_wrist_ori), se = std::sqrt(w.w_elbow_pos);
  auto frame = [&](FrameId id) { return s.frames[static_cast<int>(id)]; };

  int row = 0;
  for (auto [id, target_p, target_R] : {std::tuple{FrameId::LW, t.LW, t.R_LW}, std::tuple{FrameId::RW, t.RW, t.R_RW}}) {
    const Pose f = frame(id);
    const Vec3 e = orientation_error(target_R, f.orientation);
    out.r.segment<3>(row) = sp * (f.position - target_p);
    out.r.segment<3>(row + 3) = so * e;
    if (with_jacobian) {
      const MatX J = frame_jacobian(m, s, id);
      out.J.middleRows(row, 3) = sp * J.topRows(3);
      out.J.middleRows(row + 3, 3) = so * orientation_error_jacobian(e, f.orientation, J.bottomRows(3));
    }
    row += 6;
  }
  for (auto [id, target_p] : {std::pair{FrameId::LE, t.LE}, std::pair{FrameId::RE, t.RE}}) {
    out.r.segment<3>(row) = se * (frame(id).position - target_p);
    if (with_jacobian) out.J.middleRows(row, 3) = se * frame_jacobian(m, s, id).topRows(3);
    row += 3;
  }
  return out;
}

inline Linearized tracking_residual(const RobotModel& m, const VecX& q, const StepTargets& t, const CostWeights& w) {
  return tracking_residual(m, compute_state(m, q), t, w);
}

/// Scalar potential max(0, d_safe - min clearance) with its gradient through the active pair.
struct Potential {
  double value = 0.0;
  VecX gradient;
};

inline Potential collision_potential(const RobotModel& m, const VecX& q, double d_safe) {
  if (!(d_safe > 0.0)) throw InvariantError("d_safe must be > 0");
  const KinematicState s = compute_state(m, q);
  Potential p;
  p.gradient = VecX::Zero(m.dof());
  const PairClearance c = min_clearance(m, s);
  if (c.pair < 0 || c.distance >= d_safe) return p;
  p.value = d_safe - c.distance;
  p.gradient = -clearance_gradient(m, s, c);
  return p;
}

/// Per-pair hinge residuals sqrt(w_col) * max(0, d_safe - d_pair); the solver's collision term.
inline Linearized collision_residual(const RobotModel& m, const KinematicState& s, const CostWeights& w,
                                     bool with_jacobian = true) {
  const auto pcs = pair_clearances(m, s);
  Linearized out;
  out.r = VecX::Zero(static_cast<int>(pcs.size()));
  if (with_jacobian) out.J = MatX::Zero(out.r.size(), m.dof());
  const double sw = std::sqrt(w.w_col);
  for (const auto& pc : pcs) {
    if (pc.distance >= w.d_safe) continue;
    out.r[pc.pair] = sw * (w.d_safe - pc.distance);
    if (with_jacobian) out.J.row(pc.pair) = -sw * clearance_gradient(m, s, pc).transpose();
  }
  return out;
}

/// Hinge outside the joint box, zero inside, scaled by sqrt(w_limit).
inline Linearized limit_residual(const RobotModel& m, const VecX& q, double w_limit, bool with_jacobian = true) {
  check_dof(m, q);
  const VecX lo = m.lower_limits(), hi = m.upper_limits();
  const double sw = std::sqrt(w_limit);
  Linearized out;
  out.r = VecX::Zero(q.size());
  if (with_jacobian) out.J = MatX::Zero(q.size(), q.size());
  for (int i = 0; i < q.size(); ++i) {
    if (q[i] > hi[i]) {
      out.r[i] = sw * (q[i] - hi[i]);
      if (with_jacobian) out.J(i, i) = sw;
    } else if (q[i] < lo[i]) {
      out.r[i] = sw * (lo[i] - q[i]);
      if (with_jacobian) out.J(i, i) = -sw;
    }
  }
  return out;
}

/// First difference sqrt(w_smooth) * (q_n - q_{n-1}) for 1 <= n <= N.
inline VecX smoothness_residual(const JointTrajectory& Q, int n, double w_smooth) {
  if (n < 1 || n >= Q.q.rows()) throw DimensionError("smoothness residual: step index out of range");
  return std::sqrt(w_smooth) * (Q.q.row(n) - Q.q.row(n - 1)).transpose();
}

}  // namespace dualarm
