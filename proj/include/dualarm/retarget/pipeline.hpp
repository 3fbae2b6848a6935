#pragma once

#include "dualarm/coordination/coordination.hpp"
#include "dualarm/retarget/startgoal.hpp"
#include "dualarm/trajopt/solver.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace dualarm {

struct RetargetConfig {
  int max_rounds = 5;
  CostWeights weights;
  SolverSettings solver;
  StartGoalWeights startgoal;
  DmpGains gains;
  /// Rollout steps; 0 uses the demonstration's sample count minus one.
  int steps = 0;
  /// Joint-space resolution of the dense feasibility check (rad).
  double max_step = 0.01;
  /// Phase-1 seed pose; empty means the zero pose clamped to the joint limits.
  VecX seed_pose;
  /// Recorded with results; the pipeline itself draws no random numbers.
  std::uint64_t seed = 0;
};

inline void validate(const RetargetConfig& c) {
  if (c.max_rounds < 1) throw InvariantError("config: max_rounds must be >= 1");
  validate(c.weights);
  if (c.startgoal.w_scl < 0 || c.startgoal.w_ori < 0 || c.startgoal.w_rel < 0)
    throw InvariantError("config: start/goal weights must be >= 0");
  if (!(c.max_step > 0.0)) throw InvariantError("config: max_step must be > 0");
  if (c.steps != 0 && c.steps < 2) throw InvariantError("config: steps must be >= 2");
}

struct FingerTrajectory {
  std::string name;
  std::vector<double> q;
};

struct RoundReport {
  int round = 0;
  StartGoalSet sg;
  CostReport cost;
  FeasibilityReport feasibility;
};

struct RetargetResult {
  std::string method;
  JointTrajectory Q;
  std::vector<FingerTrajectory> fingers;
  StartGoalSet sg;
  std::vector<RoundReport> rounds;
  /// 1-based index of the round whose trajectory is stored (0 for baselines).
  int selected_round = 0;
  bool feasible = false;
  FeasibilityReport feasibility;
  ReferenceSet references;
};

// ---------------------------------------------------------------- fingers

struct FingerMap {
  double value = 0.0;
  /// Human range was degenerate; the robot midpoint was emitted.
  bool degenerate = false;
};

/// Linear map from the human joint range onto the robot range, clamped to the robot range.
inline FingerMap map_fingers(double q_h, double h_min, double h_max, double r_min, double r_max) {
  if (!(h_max > h_min)) return {0.5 * (r_min + r_max), true};
  const double v = (q_h - h_min) / (h_max - h_min) * (r_max - r_min) + r_min;
  return {std::clamp(v, std::min(r_min, r_max), std::max(r_min, r_max)), false};
}

namespace detail {

/// Linear resampling of a scalar channel from `from` samples to `to` samples over the same span.
inline std::vector<double> resample_linear(const std::vector<double>& v, int to) {
  std::vector<double> out(to);
  const int from = static_cast<int>(v.size());
  for (int i = 0; i < to; ++i) {
    const double u = to == 1 ? 0.0 : static_cast<double>(i) * (from - 1) / (to - 1);
    const int k = std::min(static_cast<int>(u), from - 2);
    const double a = u - k;
    out[i] = from == 1 ? v[0] : (1 - a) * v[k] + a * v[k + 1];
  }
  return out;
}

inline std::vector<FingerTrajectory> map_finger_channels(const Demonstration& demo, const RobotModel& robot, int samples,
                                                         std::vector<std::string>* warnings = nullptr) {
  std::vector<FingerTrajectory> out;
  auto side = [&](const std::vector<FingerChannel>& human, const std::vector<FingerJoint>& joints) {
    const std::size_t n = std::min(human.size(), joints.size());
    for (std::size_t k = 0; k < n; ++k) {
      FingerTrajectory f{joints[k].name, {}};
      bool warned = false;
      for (double q : resample_linear(human[k].q, samples)) {
        const FingerMap fm = map_fingers(q, human[k].range_min, human[k].range_max, joints[k].limit_min, joints[k].limit_max);
        warned |= fm.degenerate;
        f.q.push_back(fm.value);
      }
      if (warned && warnings) warnings->push_back("finger '" + human[k].name + "': degenerate human range");
      out.push_back(std::move(f));
    }
  };
  side(demo.left_fingers, robot.left_fingers);
  side(demo.right_fingers, robot.right_fingers);
  return out;
}

inline int rollout_steps(const RetargetConfig& c, const Demonstration& d) { return c.steps > 0 ? c.steps : d.size() - 1; }

inline VecX seed_pose(const RetargetConfig& c, const RobotModel& robot) {
  if (c.seed_pose.size() == 0) return robot.clamp_to_limits(VecX::Zero(robot.dof()));
  check_dof(robot, c.seed_pose);
  return robot.clamp_to_limits(c.seed_pose);
}

/// Absolute channels of a joint trajectory, as a reference set (orientations included).
inline ReferenceSet tracked_channels(const RobotModel& robot, const JointTrajectory& Q) {
  ReferenceSet t;
  for (auto* p : {&t.LW, &t.RW, &t.LE, &t.RE}) p->timestamps = Q.timestamps;
  for (int n = 0; n < Q.q.rows(); ++n) {
    const auto f = forward_kinematics(robot, Q.q.row(n).transpose());
    auto at = [&](FrameId id) { return f[static_cast<int>(id)]; };
    t.LW.samples.push_back(at(FrameId::LW).position);
    t.RW.samples.push_back(at(FrameId::RW).position);
    t.LE.samples.push_back(at(FrameId::LE).position);
    t.RE.samples.push_back(at(FrameId::RE).position);
    t.R_LW.push_back(at(FrameId::LW).orientation);
    t.R_RW.push_back(at(FrameId::RW).orientation);
  }
  return t;
}

/// Demonstration channels resampled onto `samples` uniform points (linear for positions).
inline ReferenceSet demo_references(const Demonstration& d, int samples) {
  ReferenceSet r;
  auto resample = [&](const PositionTrajectory& p) {
    PositionTrajectory out;
    out.timestamps = uniform_timestamps(samples, d.duration());
    for (auto& t : out.timestamps) t += d.timestamps.front();
    std::array<std::vector<double>, 3> axes;
    for (int a = 0; a < 3; ++a) {
      std::vector<double> v(p.size());
      for (int i = 0; i < p.size(); ++i) v[i] = p[i][a];
      axes[a] = resample_linear(v, samples);
    }
    for (int i = 0; i < samples; ++i) out.samples.emplace_back(axes[0][i], axes[1][i], axes[2][i]);
    return out;
  };
  r.LW = resample(d.LW);
  r.RW = resample(d.RW);
  r.LE = resample(d.LE);
  r.RE = resample(d.RE);
  r.R_LW = resample_orientations(d.R_LW, d.timestamps, samples);
  r.R_RW = resample_orientations(d.R_RW, d.timestamps, samples);
  return r;
}

inline bool better_round(const RoundReport& a, const RoundReport& b) {
  if (a.feasibility.feasible != b.feasibility.feasible) return a.feasibility.feasible;
  return a.cost.wrist_pos_rmse < b.cost.wrist_pos_rmse;
}

}  // namespace detail

/// Moves every channel's start and goal by the mean channel-space error between the tracked
/// trajectories and the references they were asked to follow.
inline StartGoalSet shift_startgoals(const ReferenceSet& refs, const ReferenceSet& tracked, const StartGoalSet& sg) {
  if (refs.size() != tracked.size() || refs.LW.size() != tracked.LW.size() || refs.LE.size() != tracked.LE.size() ||
      refs.RE.size() != tracked.RE.size())
    throw DimensionError("shift: reference and tracked lengths differ");
  const ChannelSet r = decompose(refs.LW, refs.RW, refs.LE, refs.RE);
  const ChannelSet t = decompose(tracked.LW, tracked.RW, tracked.LE, tracked.RE);
  StartGoalSet out = sg;
  for (int i = 0; i < kChannelCount; ++i) {
    Vec3 mean = Vec3::Zero();
    for (int n = 0; n < r[i].size(); ++n) mean += t[i][n] - r[i][n];
    mean /= static_cast<double>(r[i].size());
    out.S[i] += mean;
    out.G[i] += mean;
  }
  return out;
}

/// Reference generation, joint-trajectory optimization and start/goal adaptation, repeated until
/// the trajectory is feasible and tracks its references, or the round budget is spent.
inline RetargetResult retarget_pipeline(const Demonstration& demo, const RobotModel& robot,
                                        const RetargetConfig& config = {}) {
  validate(config);
  const CoordinationModel model = train_model(demo, robot, config.gains);
  const StartGoalSet& original = model.original;
  const int N = detail::rollout_steps(config, demo);

  RetargetResult result;
  result.method = "ours";
  StartGoalSet sg = original;
  std::optional<JointTrajectory> previous;
  std::optional<std::pair<RoundReport, SolveResult>> best;
  ReferenceSet best_refs;

  for (int round = 1; round <= config.max_rounds; ++round) {
    const ReferenceSet refs = reproduce(model, sg, N);
    const ReferenceTargets targets = targets_from(refs);
    const SolveInit init = previous ? SolveInit(*previous) : SolveInit(detail::seed_pose(config, robot));
    SolveResult solved = solve_joint_trajectory(robot, targets, config.weights, config.solver, init);

    RoundReport rep{round, sg, solved.report, dense_feasibility(robot, solved.Q, config.max_step)};
    result.rounds.push_back(rep);
    const bool done = rep.feasibility.feasible && solved.report.wrist_pos_rmse <= config.solver.wrist_pos_tolerance &&
                      solved.report.wrist_ori_rmse <= config.solver.wrist_ori_tolerance;
    if (!best || detail::better_round(rep, best->first)) {
      best.emplace(rep, solved);
      best_refs = refs;
    }
    if (done) break;

    sg = shift_startgoals(refs, detail::tracked_channels(robot, solved.Q), sg);
    sg = optimize_startgoals(sg, original, config.startgoal);
    previous = solved.Q;
  }

  result.selected_round = best->first.round;
  result.sg = best->first.sg;
  result.Q = std::move(best->second.Q);
  result.feasibility = best->first.feasibility;
  result.feasible = result.feasibility.feasible;
  result.references = std::move(best_refs);
  result.fingers = detail::map_finger_channels(demo, robot, N + 1);
  return result;
}

namespace detail {

inline RetargetResult track_directly(const std::string& method, const Demonstration& demo, const ReferenceSet& refs,
                                     const RobotModel& robot, const RetargetConfig& config) {
  SolverSettings s = config.solver;
  s.refine = false;
  const ReferenceTargets targets = targets_from(refs);
  SolveResult solved = solve_joint_trajectory(robot, targets, config.weights, s, seed_pose(config, robot));
  RetargetResult r;
  r.method = method;
  r.feasibility = dense_feasibility(robot, solved.Q, config.max_step);
  r.feasible = r.feasibility.feasible;
  r.rounds.push_back({1, {}, solved.report, r.feasibility});
  r.Q = std::move(solved.Q);
  r.references = refs;
  r.fingers = map_finger_channels(demo, robot, refs.size());
  return r;
}

}  // namespace detail

/// Prioritized IK on the hand-length-adjusted demonstration: no deformation, no collision term.
inline RetargetResult baseline_pure_ik(const Demonstration& demo, const RobotModel& robot,
                                       const RetargetConfig& config = {}) {
  validate(demo);
  const Demonstration adjusted = adjust_demo_for_hand_length(demo, robot.hand_length);
  const ReferenceSet refs = detail::demo_references(adjusted, detail::rollout_steps(config, demo) + 1);
  return detail::track_directly("pure-ik", demo, refs, robot, config);
}

struct ScalingRatios {
  double left = 1.0;
  double right = 1.0;
};

/// Robot reach (upper arm + forearm) over the demonstrator's mean reach, per arm.
inline ScalingRatios default_scaling_ratios(const Demonstration& demo, const RobotModel& robot) {
  const HumanLinks h = mean_link_lengths(demo);
  const auto f = forward_kinematics(robot, VecX::Zero(robot.dof()));
  auto reach = [&](Arm arm) {
    const Vec3 s = f[static_cast<int>(frame_id(arm, FrameName::Shoulder))].position;
    const Vec3 e = f[static_cast<int>(frame_id(arm, FrameName::Elbow))].position;
    const Vec3 w = f[static_cast<int>(frame_id(arm, FrameName::Wrist))].position;
    return (e - s).norm() + (w - e).norm();
  };
  return {reach(Arm::Left) / (h.upper_left + h.fore_left), reach(Arm::Right) / (h.upper_right + h.fore_right)};
}

/// Wrists and elbows scaled about the shoulders: p' = robot_shoulder + ratio (p - human_shoulder).
inline Demonstration scale_demo_positions(const Demonstration& demo, const RobotModel& robot, const ScalingRatios& k) {
  if (!(k.left > 0.0) || !(k.right > 0.0)) throw InvariantError("scaling ratios must be > 0");
  const auto f = forward_kinematics(robot, VecX::Zero(robot.dof()));
  const Vec3 sl = f[static_cast<int>(FrameId::LS)].position, sr = f[static_cast<int>(FrameId::RS)].position;
  Demonstration out = demo;
  for (int i = 0; i < demo.size(); ++i) {
    out.LW.samples[i] = sl + k.left * (demo.LW[i] - demo.shoulder_left);
    out.LE.samples[i] = sl + k.left * (demo.LE[i] - demo.shoulder_left);
    out.RW.samples[i] = sr + k.right * (demo.RW[i] - demo.shoulder_right);
    out.RE.samples[i] = sr + k.right * (demo.RE[i] - demo.shoulder_right);
  }
  out.shoulder_left = sl;
  out.shoulder_right = sr;
  return out;
}

/// Position scaling about the shoulders, then prioritized IK.
inline RetargetResult baseline_position_scaling(const Demonstration& demo, const RobotModel& robot,
                                                const std::optional<ScalingRatios>& ratios = std::nullopt,
                                                const RetargetConfig& config = {}) {
  validate(demo);
  const Demonstration adjusted = adjust_demo_for_hand_length(demo, robot.hand_length);
  const Demonstration scaled =
      scale_demo_positions(adjusted, robot, ratios ? *ratios : default_scaling_ratios(demo, robot));
  const ReferenceSet refs = detail::demo_references(scaled, detail::rollout_steps(config, demo) + 1);
  return detail::track_directly("pos-scaling", demo, refs, robot, config);
}

}  // namespace dualarm
