#pragma once

#include "dualarm/retarget/pipeline.hpp"

#include <algorithm>
#include <array>
#include <string>
#include <vector>

namespace dualarm {

/// Discrete Frechet distance by dynamic programming over monotone couplings.
template <typename Point, typename Distance>
double discrete_frechet(const std::vector<Point>& A, const std::vector<Point>& B, Distance dist) {
  if (A.empty() || B.empty()) throw InvariantError("discrete Frechet: sequences must be non-empty");
  const std::size_t n = A.size(), m = B.size();
  std::vector<double> prev(m), cur(m);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double d = dist(A[i], B[j]);
      if (i == 0 && j == 0)
        cur[j] = d;
      else if (i == 0)
        cur[j] = std::max(cur[j - 1], d);
      else if (j == 0)
        cur[j] = std::max(prev[0], d);
      else
        cur[j] = std::max(std::min({prev[j], prev[j - 1], cur[j - 1]}), d);
    }
    std::swap(prev, cur);
  }
  return prev[m - 1];
}

inline double discrete_frechet(const std::vector<Vec3>& A, const std::vector<Vec3>& B) {
  return discrete_frechet(A, B, [](const Vec3& a, const Vec3& b) { return (a - b).norm(); });
}

/// Frechet distance with the geodesic angle between orientations as the ground metric.
inline double orientation_frechet(const std::vector<Quat>& A, const std::vector<Quat>& B) {
  return discrete_frechet(A, B, [](const Quat& a, const Quat& b) { return geodesic_angle(a, b); });
}

/// Per-axis min-max normalization to [0, 1] using the bounds of both sequences; constant axes map to 0.5.
inline std::pair<std::vector<Vec3>, std::vector<Vec3>> normalize_jointly(const std::vector<Vec3>& A,
                                                                          const std::vector<Vec3>& B) {
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity()), hi = -lo;
  for (const auto* s : {&A, &B})
    for (const auto& p : *s) {
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
  auto map = [&](const std::vector<Vec3>& s) {
    std::vector<Vec3> out(s.size());
    for (std::size_t i = 0; i < s.size(); ++i)
      for (int a = 0; a < 3; ++a) {
        const double span = hi[a] - lo[a];
        out[i][a] = span > 1e-12 ? (s[i][a] - lo[a]) / span : 0.5;
      }
    return out;
  };
  return {map(A), map(B)};
}

/// Single-trajectory normalization (the pair rule applied to a trajectory with itself).
inline std::vector<Vec3> normalize_trajectory(const PositionTrajectory& A) {
  return normalize_jointly(A.samples, A.samples).first;
}

inline constexpr std::array<const char*, 9> kReportColumns = {"LW", "RW", "LE", "RE", "LRW", "LEW", "REW", "LWO", "RWO"};

struct SimilarityReport {
  std::string motion;
  std::string method;
  std::array<double, 9> frechet{};
  bool feasible = false;
  /// |robot - demo| inter-wrist distance at the demo's closest-approach instant (m).
  double contact_error = 0.0;

  double at(const std::string& column) const {
    for (std::size_t i = 0; i < kReportColumns.size(); ++i)
      if (column == kReportColumns[i]) return frechet[i];
    throw InvariantError("unknown report column '" + column + "'");
  }
};

/// Sample index where the two wrists are closest.
inline int contact_instant(const PositionTrajectory& LW, const PositionTrajectory& RW) {
  int best = 0;
  double d = std::numeric_limits<double>::infinity();
  for (int i = 0; i < LW.size(); ++i) {
    const double di = (LW[i] - RW[i]).norm();
    if (di < d) {
      d = di;
      best = i;
    }
  }
  return best;
}

/// Compares the robot's tracked channels with the hand-length-adjusted demonstration.
inline SimilarityReport evaluate_result(const Demonstration& demo, const RetargetResult& result, const RobotModel& robot,
                                        double max_step = 0.01) {
  validate(demo);
  const Demonstration ref = adjust_demo_for_hand_length(demo, robot.hand_length);
  const ReferenceSet got = detail::tracked_channels(robot, result.Q);

  SimilarityReport rep;
  rep.motion = demo.name;
  rep.method = result.method;
  const std::array<const PositionTrajectory*, 4> want_abs = {&ref.LW, &ref.RW, &ref.LE, &ref.RE};
  const std::array<const PositionTrajectory*, 4> got_abs = {&got.LW, &got.RW, &got.LE, &got.RE};
  for (int c = 0; c < 4; ++c) {
    const auto [a, b] = normalize_jointly(want_abs[c]->samples, got_abs[c]->samples);
    rep.frechet[c] = discrete_frechet(a, b);
  }
  const ChannelSet want_rel = decompose_demo(ref);
  const ChannelSet got_rel = decompose(got.LW, got.RW, got.LE, got.RE);
  for (int c = 1; c < 4; ++c) rep.frechet[3 + c] = discrete_frechet(want_rel[c].samples, got_rel[c].samples);
  rep.frechet[7] = orientation_frechet(ref.R_LW, got.R_LW);
  rep.frechet[8] = orientation_frechet(ref.R_RW, got.R_RW);
  rep.feasible = dense_feasibility(robot, result.Q, max_step).feasible;

  const int k = contact_instant(ref.LW, ref.RW);
  const int rows = static_cast<int>(result.Q.q.rows());
  const int kr = ref.size() > 1 ? static_cast<int>(std::lround(static_cast<double>(k) * (rows - 1) / (ref.size() - 1))) : 0;
  rep.contact_error = std::abs((got.LW[kr] - got.RW[kr]).norm() - (ref.LW[k] - ref.RW[k]).norm());
  return rep;
}

}  // namespace dualarm
