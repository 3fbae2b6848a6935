#pragma once

#include "dualarm/core/error.hpp"
#include "dualarm/core/types.hpp"
#include "dualarm/dmp/dmp.hpp"
#include "dualarm/kinematics/robot_model.hpp"

#include <array>
#include <future>
#include <string>
#include <vector>

namespace dualarm {

/// Per-joint finger angle channel with the human range used by the linear finger map.
struct FingerChannel {
  std::string name;
  std::vector<double> q;
  double range_min = 0.0;
  double range_max = 1.0;
};

/// Timestamped dual-arm recording, expressed with the mid-shoulder point at the origin.
struct Demonstration {
  std::string name;
  std::vector<double> timestamps;
  PositionTrajectory LW, RW, LE, RE;
  std::vector<Quat> R_LW, R_RW;
  double hand_length = 0.0;
  Vec3 shoulder_left = Vec3::Zero();
  Vec3 shoulder_right = Vec3::Zero();
  std::vector<FingerChannel> left_fingers, right_fingers;

  int size() const { return static_cast<int>(timestamps.size()); }
  double duration() const { return timestamps.back() - timestamps.front(); }
};

namespace detail {
inline double relative_variation(const std::vector<double>& v) {
  double lo = v.front(), hi = v.front(), mean = 0.0;
  for (double x : v) {
    lo = std::min(lo, x);
    hi = std::max(hi, x);
    mean += x;
  }
  mean /= static_cast<double>(v.size());
  return mean > 0.0 ? (hi - lo) / mean : 0.0;
}
}  // namespace detail

/// Link lengths of a demonstration sample: upper arm and forearm, per arm.
struct HumanLinks {
  double upper_left, fore_left, upper_right, fore_right;
};

inline HumanLinks mean_link_lengths(const Demonstration& d) {
  HumanLinks h{0, 0, 0, 0};
  for (int i = 0; i < d.size(); ++i) {
    h.upper_left += (d.LE[i] - d.shoulder_left).norm();
    h.fore_left += (d.LW[i] - d.LE[i]).norm();
    h.upper_right += (d.RE[i] - d.shoulder_right).norm();
    h.fore_right += (d.RW[i] - d.RE[i]).norm();
  }
  const double n = d.size();
  return {h.upper_left / n, h.fore_left / n, h.upper_right / n, h.fore_right / n};
}

inline void validate(const Demonstration& d) {
  const auto n = d.timestamps.size();
  auto check_channel = [&](const PositionTrajectory& t, const char* tag) {
    if (t.samples.size() != n) throw InvariantError(std::string("demonstration: channel ") + tag + " length differs");
    for (std::size_t i = 0; i < n; ++i)
      if (t.timestamps[i] != d.timestamps[i])
        throw InvariantError(std::string("demonstration: channel ") + tag + " is not on the shared timestamp grid");
    try {
      validate(t);
    } catch (const InvariantError& e) {
      throw InvariantError(std::string("demonstration: channel ") + tag + ": " + e.what());
    }
  };
  check_channel(d.LW, "LW");
  check_channel(d.RW, "RW");
  check_channel(d.LE, "LE");
  check_channel(d.RE, "RE");
  if (d.R_LW.size() != n || d.R_RW.size() != n)
    throw InvariantError("demonstration: orientation channels must match the timestamp count");
  for (const auto* seq : {&d.R_LW, &d.R_RW})
    for (const auto& q : *seq)
      if (!q.coeffs().allFinite() || std::abs(q.norm() - 1.0) > 1e-6)
        throw InvariantError("demonstration: orientations must be unit quaternions");
  if (!(d.hand_length >= 0.0)) throw InvariantError("demonstration: hand_length must be >= 0");

  std::array<std::vector<double>, 4> links;
  for (std::size_t i = 0; i < n; ++i) {
    links[0].push_back((d.LE[i] - d.shoulder_left).norm());
    links[1].push_back((d.LW[i] - d.LE[i]).norm());
    links[2].push_back((d.RE[i] - d.shoulder_right).norm());
    links[3].push_back((d.RW[i] - d.RE[i]).norm());
  }
  static const char* kLinkNames[] = {"left upper arm", "left forearm", "right upper arm", "right forearm"};
  for (int k = 0; k < 4; ++k)
    if (detail::relative_variation(links[k]) >= 0.05)
      throw InvariantError(std::string("demonstration: ") + kLinkNames[k] + " length varies by 5% or more");

  for (const auto* fs : {&d.left_fingers, &d.right_fingers})
    for (const auto& f : *fs)
      if (f.q.size() != n) throw InvariantError("demonstration: finger channel '" + f.name + "' length differs");
}

/// Moves a demonstrated wrist so the robot hand tip lands on the human's virtual hand tip.
/// The demonstration orientation is used for both the hand and the robot back-off term.
inline Vec3 adjust_wrist_for_hand_length(const Vec3& p, const Quat& R_demo, double L_H, double L_R) {
  if (L_H < 0.0 || L_R < 0.0) throw InvariantError("hand lengths must be >= 0");
  const Vec3 tip = p + R_demo * Vec3(0.0, 0.0, L_H);
  return tip + R_demo * Vec3(0.0, 0.0, -L_R);
}

/// Copy of the demonstration with both wrist channels hand-length adjusted for a robot hand of length L_R.
inline Demonstration adjust_demo_for_hand_length(const Demonstration& d, double L_R) {
  Demonstration out = d;
  for (int i = 0; i < d.size(); ++i) {
    out.LW.samples[i] = adjust_wrist_for_hand_length(d.LW[i], d.R_LW[i], d.hand_length, L_R);
    out.RW.samples[i] = adjust_wrist_for_hand_length(d.RW[i], d.R_RW[i], d.hand_length, L_R);
  }
  return out;
}

/// Leader-follower channels: the right wrist is the base; the others are relative.
enum class Channel { RW = 0, LRW = 1, LEW = 2, REW = 3 };
inline constexpr int kChannelCount = 4;
inline constexpr std::array<const char*, 4> kChannelNames = {"RW", "LRW", "LEW", "REW"};

using ChannelSet = std::array<PositionTrajectory, 4>;

inline PositionTrajectory difference(const PositionTrajectory& a, const PositionTrajectory& b) {
  PositionTrajectory out;
  out.timestamps = a.timestamps;
  out.samples.resize(a.samples.size());
  for (std::size_t i = 0; i < a.samples.size(); ++i) out.samples[i] = a.samples[i] - b.samples[i];
  return out;
}

inline PositionTrajectory sum(const PositionTrajectory& a, const PositionTrajectory& b) {
  PositionTrajectory out;
  out.timestamps = a.timestamps;
  out.samples.resize(a.samples.size());
  for (std::size_t i = 0; i < a.samples.size(); ++i) out.samples[i] = a.samples[i] + b.samples[i];
  return out;
}

/// Absolute wrist/elbow trajectories -> {RW, LW-RW, LE-LW, RE-RW}.
inline ChannelSet decompose(const PositionTrajectory& LW, const PositionTrajectory& RW, const PositionTrajectory& LE,
                            const PositionTrajectory& RE) {
  return {RW, difference(LW, RW), difference(LE, LW), difference(RE, RW)};
}

inline ChannelSet decompose_demo(const Demonstration& d) { return decompose(d.LW, d.RW, d.LE, d.RE); }

/// Adjustable DMP endpoints, one start/goal pair per channel.
struct StartGoalSet {
  std::array<Vec3, 4> S{Vec3::Zero(), Vec3::Zero(), Vec3::Zero(), Vec3::Zero()};
  std::array<Vec3, 4> G{Vec3::Zero(), Vec3::Zero(), Vec3::Zero(), Vec3::Zero()};

  Vec3& start(Channel c) { return S[static_cast<int>(c)]; }
  Vec3& goal(Channel c) { return G[static_cast<int>(c)]; }
  const Vec3& start(Channel c) const { return S[static_cast<int>(c)]; }
  const Vec3& goal(Channel c) const { return G[static_cast<int>(c)]; }

  double max_abs_difference(const StartGoalSet& o) const {
    double m = 0.0;
    for (int i = 0; i < 4; ++i)
      m = std::max({m, (S[i] - o.S[i]).cwiseAbs().maxCoeff(), (G[i] - o.G[i]).cwiseAbs().maxCoeff()});
    return m;
  }
};

inline void validate(const StartGoalSet& sg) {
  for (int i = 0; i < 4; ++i)
    if (!sg.S[i].allFinite() || !sg.G[i].allFinite())
      throw InvariantError(std::string("start/goal set: channel ") + kChannelNames[i] + " is not finite");
}

struct CoordinationModel {
  std::array<DmpParams, 4> dmp;
  /// Orientation references on the demonstration grid, used directly (not learned).
  std::vector<Quat> R_LW, R_RW;
  std::vector<double> timestamps;
  StartGoalSet original;

  double duration() const { return timestamps.back() - timestamps.front(); }
  const DmpParams& channel(Channel c) const { return dmp[static_cast<int>(c)]; }
};

/// Reproduced references for both arms.
struct ReferenceSet {
  PositionTrajectory LW, RW, LE, RE;
  std::vector<Quat> R_LW, R_RW;

  int size() const { return RW.size(); }
};

/// Spherical resampling of a quaternion sequence from grid `t` to `count` uniform samples over the same span.
inline std::vector<Quat> resample_orientations(const std::vector<Quat>& R, const std::vector<double>& t, int count) {
  // sign-continuous copy so every neighbouring pair interpolates along the short arc
  std::vector<Quat> q = R;
  for (std::size_t i = 1; i < q.size(); ++i)
    if (q[i].dot(q[i - 1]) < 0.0) q[i].coeffs() = -q[i].coeffs();
  std::vector<Quat> out(count);
  const double t0 = t.front(), span = t.back() - t.front();
  std::size_t k = 0;
  for (int i = 0; i < count; ++i) {
    const double ti = t0 + span * static_cast<double>(i) / static_cast<double>(count - 1);
    while (k + 2 < t.size() && t[k + 1] <= ti) ++k;
    const double u = std::clamp((ti - t[k]) / (t[k + 1] - t[k]), 0.0, 1.0);
    out[i] = slerp_shortest(q[k], q[k + 1], u);
  }
  return out;
}

/// Trains the four leader-follower DMPs from the hand-length-adjusted demonstration.
inline CoordinationModel train_model(const Demonstration& demo, const RobotModel& robot, const DmpGains& gains = {}) {
  validate(demo);
  const Demonstration adjusted = adjust_demo_for_hand_length(demo, robot.hand_length);
  const ChannelSet ch = decompose_demo(adjusted);

  CoordinationModel m;
  std::array<std::future<DmpParams>, 4> jobs;
  for (int i = 0; i < 4; ++i)
    jobs[i] = std::async(std::launch::async, [&ch, &gains, i] { return learn_weights(ch[i], gains); });
  for (int i = 0; i < 4; ++i) {
    try {
      m.dmp[i] = jobs[i].get();
    } catch (const Error& e) {
      throw InvariantError(std::string("channel ") + kChannelNames[i] + ": " + e.what());
    }
    m.original.S[i] = ch[i].samples.front();
    m.original.G[i] = ch[i].samples.back();
  }
  m.R_LW = demo.R_LW;
  m.R_RW = demo.R_RW;
  m.timestamps = demo.timestamps;
  return m;
}

/// Rolls out all channels for the given endpoints and superimposes them into absolute references.
inline ReferenceSet reproduce(const CoordinationModel& m, const StartGoalSet& sg, int N) {
  if (N < 2) throw InvariantError("reproduce: N must be >= 2");
  validate(sg);
  std::array<PositionTrajectory, 4> r;
  for (int i = 0; i < 4; ++i) r[i] = rollout(m.dmp[i], sg.S[i], sg.G[i], N);
  ReferenceSet out;
  out.RW = r[0];
  out.LW = sum(r[1], out.RW);
  out.LE = sum(r[2], out.LW);
  out.RE = sum(r[3], out.RW);
  out.R_LW = resample_orientations(m.R_LW, m.timestamps, N + 1);
  out.R_RW = resample_orientations(m.R_RW, m.timestamps, N + 1);
  return out;
}

}  // namespace dualarm
