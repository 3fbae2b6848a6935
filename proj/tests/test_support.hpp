#pragma once

#include "dualarm/core/types.hpp"
#include "dualarm/dmp/dmp.hpp"

#include <cmath>
#include <random>
#include <string>

namespace dualarm::test {

inline std::string data_path(const std::string& rel) { return std::string(DUALARM_DATA_DIR) + "/" + rel; }

/// Minimum-jerk profile s(u) on [0,1] with zero end velocity and acceleration.
inline double min_jerk(double u) { return u * u * u * (10.0 - 15.0 * u + 6.0 * u * u); }

/// Smooth 3-D demo: min-jerk transfer plus bumps that vanish (with derivatives) at both ends.
inline PositionTrajectory smooth_demo(std::mt19937_64& rng, int samples = 201, double duration = 2.0) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  const Vec3 y0(U(rng) * 0.3, U(rng) * 0.3, U(rng) * 0.3);
  // every axis moves at least 5 cm so (G - S)/(g - y0) stays bounded for random targets
  std::uniform_real_distribution<double> span(0.05, 0.3);
  auto signed_span = [&] { return (U(rng) < 0.0 ? -1.0 : 1.0) * span(rng); };
  const Vec3 g = y0 + Vec3(signed_span(), signed_span(), signed_span());
  const Vec3 bump1(U(rng) * 0.15, U(rng) * 0.15, U(rng) * 0.15);
  const Vec3 bump2(U(rng) * 0.08, U(rng) * 0.08, U(rng) * 0.08);
  PositionTrajectory d;
  d.timestamps = uniform_timestamps(samples, duration);
  for (int k = 0; k < samples; ++k) {
    const double u = static_cast<double>(k) / (samples - 1);
    const double w = std::pow(u * (1.0 - u), 3) * 64.0;  // vanishes to second order at ends
    d.samples.push_back(y0 + (g - y0) * min_jerk(u) + bump1 * w * std::sin(kPi * u) +
                        bump2 * w * std::sin(2.0 * kPi * u));
  }
  return d;
}

inline double max_axis_range(const PositionTrajectory& t) {
  Vec3 lo = t.samples[0], hi = t.samples[0];
  for (const auto& s : t.samples) {
    lo = lo.cwiseMin(s);
    hi = hi.cwiseMax(s);
  }
  return (hi - lo).maxCoeff();
}

inline double rmse(const PositionTrajectory& a, const PositionTrajectory& b) {
  double acc = 0.0;
  for (int k = 0; k < a.size(); ++k) acc += (a[k] - b[k]).squaredNorm();
  return std::sqrt(acc / a.size());
}

}  // namespace dualarm::test
