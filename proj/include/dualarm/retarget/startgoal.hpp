#pragma once

#include "dualarm/coordination/coordination.hpp"

#include <Eigen/Cholesky>
#include <cmath>

namespace dualarm {

inline constexpr double kDegenerateDifference = 1e-6;  // m
inline constexpr double kDegenerateScaleRef = 1e-3;    // m

/// Scale change of the start-goal vector, >= 1. A degenerate original penalizes any change of
/// length linearly against the reference length.
inline double scale_cost(const Vec3& S, const Vec3& G, const Vec3& S0, const Vec3& G0) {
  const double d = (S - G).norm(), d0 = (S0 - G0).norm();
  if (d0 <= kDegenerateDifference) return 1.0 + std::abs(d - d0) / kDegenerateScaleRef;
  const double dg = std::max(d, kDegenerateDifference);
  return std::max(dg / d0, d0 / dg);
}

struct AngleCost {
  double value = 0.0;
  /// Set when either difference vector is too short to define a direction.
  bool degenerate = false;
};

/// Angle in [0, pi] between (G - S) and (G0 - S0).
inline AngleCost orientation_cost(const Vec3& S, const Vec3& G, const Vec3& S0, const Vec3& G0) {
  const Vec3 a = G - S, b = G0 - S0;
  if (a.norm() <= kDegenerateDifference || b.norm() <= kDegenerateDifference) return {0.0, true};
  // atan2 is exact at the floor; the normalized-dot arccos is not
  return {std::atan2(a.cross(b).norm(), a.dot(b)), false};
}

/// Deviation of the endpoints from the originals: product form, or sum of the two distances.
inline double relative_cost(const Vec3& S, const Vec3& G, const Vec3& S0, const Vec3& G0, bool sum_form = false) {
  const double a = (S - S0).norm(), b = (G - G0).norm();
  return sum_form ? a + b : a * b;
}

struct StartGoalWeights {
  double w_scl = 1.0;
  double w_ori = 1.0;
  double w_rel = 1.0;
  bool relative_sum = false;
};

namespace detail {

/// Residuals of one channel: scale surrogate, orientation, and (relative channels only) deviation.
inline VecX channel_residuals(const Eigen::Matrix<double, 6, 1>& x, const Vec3& S0, const Vec3& G0, bool relative,
                              const StartGoalWeights& w) {
  const Vec3 S = x.head<3>(), G = x.tail<3>();
  VecX r(relative ? 3 : 2);
  r[0] = std::sqrt(w.w_scl) * (scale_cost(S, G, S0, G0) - 1.0);
  r[1] = std::sqrt(w.w_ori) * orientation_cost(S, G, S0, G0).value;
  if (relative) r[2] = std::sqrt(w.w_rel) * relative_cost(S, G, S0, G0, w.relative_sum);
  return r;
}

}  // namespace detail

/// Total start/goal objective: scale and orientation over all channels, relative over the relative channels.
inline double startgoal_objective(const StartGoalSet& sg, const StartGoalSet& sg0, const StartGoalWeights& w) {
  double total = 0.0;
  for (int i = 0; i < kChannelCount; ++i) {
    Eigen::Matrix<double, 6, 1> x;
    x << sg.S[i], sg.G[i];
    total += detail::channel_residuals(x, sg0.S[i], sg0.G[i], i != 0, w).squaredNorm();
  }
  return total;
}

/// Levenberg-Marquardt on the start/goal costs with central-difference Jacobians. The objective is
/// separable across channels, so each channel is solved on its own six variables. Only strictly
/// decreasing steps are accepted; the input is returned unchanged when it is already at the floor.
inline StartGoalSet optimize_startgoals(const StartGoalSet& sg, const StartGoalSet& sg0, const StartGoalWeights& w,
                                        int max_iterations = 100) {
  validate(sg);
  validate(sg0);
  StartGoalSet out = sg;
  for (int i = 0; i < kChannelCount; ++i) {
    const bool relative = i != 0;
    Eigen::Matrix<double, 6, 1> x;
    x << sg.S[i], sg.G[i];
    auto residuals = [&](const Eigen::Matrix<double, 6, 1>& v) {
      return detail::channel_residuals(v, sg0.S[i], sg0.G[i], relative, w);
    };
    VecX r = residuals(x);
    double cost = r.squaredNorm();
    double lambda = 1e-3;
    for (int it = 0; it < max_iterations && cost > 0.0; ++it) {
      MatX J(r.size(), 6);
      for (int k = 0; k < 6; ++k) {
        const double h = 1e-7 * std::max(1.0, std::abs(x[k]));
        Eigen::Matrix<double, 6, 1> xp = x, xm = x;
        xp[k] += h;
        xm[k] -= h;
        J.col(k) = (residuals(xp) - residuals(xm)) / (2.0 * h);
      }
      const Eigen::Matrix<double, 6, 6> H = J.transpose() * J;
      const Eigen::Matrix<double, 6, 1> g = J.transpose() * r;
      bool accepted = false;
      while (lambda < 1e12) {
        Eigen::Matrix<double, 6, 6> A = H;
        A.diagonal().array() += lambda * (1.0 + H.diagonal().array());
        const Eigen::Matrix<double, 6, 1> step = -A.ldlt().solve(g);
        const Eigen::Matrix<double, 6, 1> trial = x + step;
        const VecX rt = residuals(trial);
        const double ct = rt.squaredNorm();
        if (std::isfinite(ct) && ct < cost) {
          const double rel = (cost - ct) / cost;
          x = trial;
          r = rt;
          cost = ct;
          lambda = std::max(lambda * 0.5, 1e-12);
          accepted = rel >= 1e-12;
          break;
        }
        lambda *= 10.0;
      }
      if (!accepted) break;
    }
    out.S[i] = x.head<3>();
    out.G[i] = x.tail<3>();
  }
  return out;
}

}  // namespace dualarm
