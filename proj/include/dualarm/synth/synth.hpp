#pragma once

#include "dualarm/coordination/coordination.hpp"
#include "dualarm/kinematics/forward_kinematics.hpp"

#include <cmath>
#include <optional>
#include <random>
#include <string>

namespace dualarm {

enum class Family { MirrorArc, Clap, ConvergeTap, SequentialWave, FigureEight };

inline const char* to_string(Family f) {
  switch (f) {
    case Family::MirrorArc: return "mirror-arc";
    case Family::Clap: return "clap";
    case Family::ConvergeTap: return "converge-tap";
    case Family::SequentialWave: return "sequential-wave";
    default: return "figure-eight";
  }
}

inline std::optional<Family> parse_family(const std::string& s) {
  for (Family f : {Family::MirrorArc, Family::Clap, Family::ConvergeTap, Family::SequentialWave, Family::FigureEight})
    if (s == to_string(f)) return f;
  return std::nullopt;
}

struct MotionFamily {
  Family family = Family::Clap;
  double amplitude = 0.12;   // m
  double period = 4.0;       // s, also the recording length
  double phase = 0.0;        // rad
  double separation = 0.30;  // m, resting distance between wrists
  double sample_rate = 50.0; // Hz
  double noise = 0.0;        // m
};

/// Human body used by the generator; proportions match the bundled reference robot.
struct HumanBody {
  double shoulder_half_width = 0.20;
  double upper = 0.30;
  double fore = 0.26;
  double hand = 0.18;
  /// Wrist-to-wrist distance when the hands touch.
  double contact_gap = 0.12;
};

inline void validate(const MotionFamily& f) {
  if (!(f.amplitude > 0.0)) throw InvariantError("motion family: amplitude must be > 0");
  if (!(f.period > 0.0)) throw InvariantError("motion family: period must be > 0");
  if (!(f.sample_rate > 0.0)) throw InvariantError("motion family: sample rate must be > 0");
  if (!(f.noise >= 0.0)) throw InvariantError("motion family: noise must be >= 0");
  if (!(f.separation >= 0.0) || !std::isfinite(f.phase)) throw InvariantError("motion family: invalid separation or phase");
  if (f.period * f.sample_rate < 10.0) throw InvariantError("motion family: fewer than 10 samples");
}

namespace detail {

inline double bump(double u, double center, double width) {
  const double s = (u - center) / width;
  return std::exp(-s * s);
}

inline double min_jerk(double u) { return u * u * u * (10.0 - 15.0 * u + 6.0 * u * u); }

inline Vec3 mirror(const Vec3& v) { return {v.x(), -v.y(), v.z()}; }

/// Elbow on the swivel circle of a two-link arm. `side` is +1 for left, -1 for right so that
/// mirrored wrist paths yield mirrored elbows.
inline Vec3 place_elbow(const Vec3& shoulder, const Vec3& wrist, double upper, double fore, double swivel, double side) {
  Vec3 d = wrist - shoulder;
  double dist = d.norm();
  const double reach = upper + fore;
  if (dist > reach * 0.999) throw InvariantError("synth: wrist path leaves the human workspace");
  if (dist < std::abs(upper - fore) + 1e-3) throw InvariantError("synth: wrist path too close to the shoulder");
  const Vec3 n = d / dist;
  const double a = (dist * dist + upper * upper - fore * fore) / (2.0 * dist);
  const double rho = std::sqrt(std::max(0.0, upper * upper - a * a));
  Vec3 hint(0.0, side * 0.4, -1.0);
  Vec3 e1 = hint - hint.dot(n) * n;
  e1.normalize();
  const Vec3 e2 = side * n.cross(e1);
  return shoulder + a * n + rho * (std::cos(swivel) * e1 + std::sin(swivel) * e2);
}

/// Hand frame: z along the hand, blended from forearm direction, a pointing direction and velocity.
inline Quat hand_frame(const Vec3& forearm, const Vec3& pointing, const Vec3& velocity, double side,
                       double forearm_weight) {
  Vec3 z = forearm_weight * forearm.normalized() + 1.5 * pointing + 0.5 * velocity / (velocity.norm() + 0.2);
  z.normalize();
  // palm normal faces the other hand
  Vec3 ref(0.0, -side, 0.0);
  Vec3 x = ref - ref.dot(z) * z;
  if (x.norm() < 1e-6) x = Vec3::UnitZ() - z.z() * z;
  x.normalize();
  Mat3 R;
  R.col(0) = x;
  R.col(1) = z.cross(x);
  R.col(2) = z;
  return Quat(R).normalized();
}

/// Smooth seeded perturbation: a few low-frequency sinusoids per axis.
struct SmoothNoise {
  std::array<std::array<double, 3>, 3> amp{}, freq{}, phase{};

  SmoothNoise(std::mt19937_64& rng, double amplitude) {
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int axis = 0; axis < 3; ++axis)
      for (int k = 0; k < 3; ++k) {
        amp[axis][k] = amplitude * (0.3 + 0.7 * U(rng)) / 3.0;
        freq[axis][k] = 0.5 + 2.5 * U(rng);
        phase[axis][k] = 2.0 * kPi * U(rng);
      }
  }
  Vec3 operator()(double u) const {
    Vec3 v = Vec3::Zero();
    for (int axis = 0; axis < 3; ++axis)
      for (int k = 0; k < 3; ++k) v[axis] += amp[axis][k] * std::sin(2.0 * kPi * freq[axis][k] * u + phase[axis][k]);
    return v;
  }
};

struct WristPair {
  Vec3 left, right;
  /// Preferred hand pointing directions.
  Vec3 point_left, point_right;
  /// How much the hand follows the forearm; contact motions keep the hands parallel.
  double forearm_weight = 1.0;
};

inline WristPair family_wrists(const MotionFamily& f, const HumanBody& h, double u) {
  const Vec3 c(0.24, 0.0, -0.22);
  const double A = f.amplitude, sep = f.separation, ph = f.phase;
  const Vec3 fwd = Vec3::UnitX();
  WristPair w;
  w.point_left = fwd;
  w.point_right = fwd;
  switch (f.family) {
    case Family::MirrorArc: {
      const double th = ph + 1.5 * kPi * u;
      w.left = c + Vec3(0.6 * A * std::sin(th), sep / 2 + 0.5 * A * (1 - std::cos(th)), 1.5 * A * (u - 0.5) + 0.4 * A * std::sin(2 * th));
      w.right = mirror(w.left);
      break;
    }
    case Family::Clap: {
      const double b = bump(u, 0.55, 0.16);
      const double gap = sep - (sep - h.contact_gap) * b;
      w.left = c + Vec3(0.8 * A * (u - 0.5), gap / 2, 0.9 * A * std::sin(kPi * 0.9 * u + ph) - 0.3 * A);
      w.right = mirror(w.left);
      w.forearm_weight = 0.0;
      break;
    }
    case Family::ConvergeTap: {
      // right wrist holds a slowly drifting target; the left wrist taps it twice
      w.right = c + Vec3(0.5 * A * std::sin(kPi * u + ph), -0.05 - 0.6 * A * u, 0.8 * A * (u - 0.5));
      const double b = std::max(bump(u, 0.35, 0.12), bump(u, 0.75, 0.12));
      const double gap = sep - (sep - h.contact_gap) * b;
      w.left = w.right + Vec3(0.3 * A * std::sin(2 * kPi * u), gap, 0.5 * A * (1 - b) * std::cos(kPi * u));
      w.forearm_weight = 0.0;
      break;
    }
    case Family::SequentialWave: {
      const double bl = bump(u, 0.3, 0.12), br = bump(u, 0.7, 0.12);
      w.left = c + Vec3(0.5 * A * (u - 0.5), sep / 2 + 0.2 * A * bl, 1.6 * A * bl - 0.4 * A * u);
      w.right = c + Vec3(0.5 * A * (0.5 - u), -sep / 2 - 0.2 * A * br, 1.6 * A * br - 0.4 * A * (1 - u));
      w.point_left = Vec3(0.6, 0.0, 0.8).normalized();
      w.point_right = Vec3(0.6, 0.0, 0.8).normalized();
      break;
    }
    case Family::FigureEight: {
      const double th = ph + 1.8 * kPi * u;
      const Vec3 e(0.3 * A * std::sin(th), A * std::sin(th), 0.6 * A * std::sin(2 * th));
      const double lag = 0.25;
      const Vec3 el(0.3 * A * std::sin(th - lag), A * std::sin(th - lag), 0.6 * A * std::sin(2 * (th - lag)));
      w.right = c + Vec3(0.0, -sep / 2, 0.0) + e;
      w.left = c + Vec3(0.0, sep / 2, 0.0) + el;
      break;
    }
  }
  return w;
}

inline std::vector<Vec3> velocities(const std::vector<Vec3>& p, double dt) {
  const std::size_t n = p.size();
  std::vector<Vec3> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t a = i == 0 ? 0 : i - 1, b = i + 1 == n ? n - 1 : i + 1;
    v[i] = (p[b] - p[a]) / (static_cast<double>(b - a) * dt);
  }
  return v;
}

}  // namespace detail

/// Analytic dual-arm demonstration of one motion family. Deterministic per seed.
inline Demonstration synth_demo(const MotionFamily& fam, std::uint64_t seed, const HumanBody& body = {}) {
  validate(fam);
  std::mt19937_64 rng(seed);
  const detail::SmoothNoise noise_l(rng, fam.noise), noise_r(rng, fam.noise);

  const int count = static_cast<int>(std::lround(fam.period * fam.sample_rate)) + 1;
  Demonstration d;
  d.name = to_string(fam.family);
  d.timestamps = uniform_timestamps(count, fam.period);
  d.hand_length = body.hand;
  d.shoulder_left = Vec3(0.0, body.shoulder_half_width, 0.0);
  d.shoulder_right = Vec3(0.0, -body.shoulder_half_width, 0.0);

  std::vector<Vec3> lw(count), rw(count), le(count), re(count);
  std::vector<detail::WristPair> pairs(count);
  for (int i = 0; i < count; ++i) {
    // minimum-jerk time warp: the recording starts and ends at rest
    const double u = detail::min_jerk(static_cast<double>(i) / (count - 1));
    pairs[i] = detail::family_wrists(fam, body, u);
    lw[i] = pairs[i].left + (fam.noise > 0.0 ? noise_l(u) : Vec3::Zero());
    rw[i] = pairs[i].right + (fam.noise > 0.0 ? noise_r(u) : Vec3::Zero());
    const double swivel = 0.25 + 0.15 * std::sin(kPi * u + fam.phase);
    le[i] = detail::place_elbow(d.shoulder_left, lw[i], body.upper, body.fore, swivel, 1.0);
    re[i] = detail::place_elbow(d.shoulder_right, rw[i], body.upper, body.fore, swivel, -1.0);
  }
  const double dt = fam.period / (count - 1);
  const auto vl = detail::velocities(lw, dt), vr = detail::velocities(rw, dt);
  for (int i = 0; i < count; ++i) {
    d.R_LW.push_back(detail::hand_frame(lw[i] - le[i], pairs[i].point_left, vl[i], 1.0, pairs[i].forearm_weight));
    d.R_RW.push_back(detail::hand_frame(rw[i] - re[i], pairs[i].point_right, vr[i], -1.0, pairs[i].forearm_weight));
  }
  auto traj = [&](std::vector<Vec3>& s) { return PositionTrajectory{std::move(s), d.timestamps}; };
  d.LW = traj(lw);
  d.RW = traj(rw);
  d.LE = traj(le);
  d.RE = traj(re);

  // simple grasp-like finger curl tied to the motion phase
  static const char* kFingers[] = {"thumb_bend", "thumb_rot", "index", "middle", "ring", "little"};
  for (int side = 0; side < 2; ++side) {
    auto& out = side == 0 ? d.left_fingers : d.right_fingers;
    for (int k = 0; k < 6; ++k) {
      FingerChannel f{std::string(side == 0 ? "l_" : "r_") + kFingers[k], {}, 0.0, 1.6};
      for (int i = 0; i < count; ++i) {
        const double u = static_cast<double>(i) / (count - 1);
        f.q.push_back(0.8 + 0.7 * std::sin(kPi * u + 0.3 * k + side));
      }
      out.push_back(std::move(f));
    }
  }
  validate(d);
  return d;
}

/// Demonstration recorded from the robot itself: channels are FK of Q, hand length equals the robot's.
inline Demonstration synth_from_robot(const RobotModel& m, const JointTrajectory& Q, const std::string& name = "self") {
  validate(Q, m.dof());
  Demonstration d;
  d.name = name;
  d.timestamps = Q.timestamps;
  d.hand_length = m.hand_length;
  std::vector<Vec3> lw, rw, le, re;
  for (int i = 0; i < Q.q.rows(); ++i) {
    const auto f = forward_kinematics(m, Q.q.row(i).transpose());
    auto at = [&](FrameId id) { return f[static_cast<int>(id)]; };
    lw.push_back(at(FrameId::LW).position);
    rw.push_back(at(FrameId::RW).position);
    le.push_back(at(FrameId::LE).position);
    re.push_back(at(FrameId::RE).position);
    d.R_LW.push_back(at(FrameId::LW).orientation);
    d.R_RW.push_back(at(FrameId::RW).orientation);
    if (i == 0) {
      d.shoulder_left = at(FrameId::LS).position;
      d.shoulder_right = at(FrameId::RS).position;
    }
  }
  d.LW = {lw, d.timestamps};
  d.RW = {rw, d.timestamps};
  d.LE = {le, d.timestamps};
  d.RE = {re, d.timestamps};
  validate(d);
  return d;
}

}  // namespace dualarm
