#pragma once

#include "dualarm/core/error.hpp"
#include "dualarm/core/types.hpp"

#include <array>
#include <cmath>
#include <string>
#include <vector>

namespace dualarm {

/// Uniformly sampled 3-D position trajectory (meters, seconds).
struct PositionTrajectory {
  std::vector<Vec3> samples;
  std::vector<double> timestamps;

  int size() const { return static_cast<int>(samples.size()); }
  double duration() const { return timestamps.back() - timestamps.front(); }
  const Vec3& operator[](int i) const { return samples[i]; }
};

inline void validate(const PositionTrajectory& traj) {
  if (traj.samples.size() < 3) throw InvariantError("position trajectory: needs at least 3 samples (N >= 2)");
  if (traj.samples.size() != traj.timestamps.size())
    throw InvariantError("position trajectory: sample and timestamp counts differ");
  const double dt = traj.timestamps[1] - traj.timestamps[0];
  if (!(dt > 0.0)) throw InvariantError("position trajectory: timestamps must be increasing");
  for (std::size_t i = 1; i < traj.timestamps.size(); ++i) {
    if (std::abs((traj.timestamps[i] - traj.timestamps[i - 1]) - dt) > 1e-9)
      throw InvariantError("position trajectory: timestamps are not uniformly spaced");
  }
  for (const auto& s : traj.samples)
    if (!s.allFinite()) throw InvariantError("position trajectory: non-finite sample");
}

inline std::vector<double> uniform_timestamps(int count, double duration) {
  std::vector<double> t(count);
  for (int i = 0; i < count; ++i) t[i] = duration * static_cast<double>(i) / static_cast<double>(count - 1);
  return t;
}

struct DmpGains {
  double K = 100.0;
  double alpha = 4.0;
  int n_basis = 50;
  /// D = 2 sqrt(K) when unset (critical damping).
  double D = -1.0;

  double damping() const { return D > 0.0 ? D : 2.0 * std::sqrt(K); }
};

/// One learned transformation system shared by the three position dimensions.
struct DmpParams {
  double K = 100.0;
  double D = 20.0;
  double alpha = 4.0;
  double tau = 1.0;
  std::vector<double> centers;  // phase space, strictly decreasing in (0, 1]
  std::vector<double> widths;
  Eigen::MatrixX3d weights;     // n_basis x 3
  Vec3 y0 = Vec3::Zero();
  Vec3 goal = Vec3::Zero();
  /// Dimensions whose demo had |g - y0| < 1e-6 use this stored forcing scale instead of (G - S).
  std::array<bool, 3> degenerate{false, false, false};
  Vec3 degenerate_scale = Vec3::Zero();

  int n_basis() const { return static_cast<int>(centers.size()); }
};

inline constexpr double kDegenerateSpan = 1e-6;

inline void validate(const DmpParams& p) {
  if (!(p.K > 0.0) || !(p.D >= 0.0) || !(p.alpha > 0.0) || !(p.tau > 0.0))
    throw InvariantError("dmp: K, alpha, tau must be > 0 and D >= 0");
  if (p.centers.size() < 2 || p.widths.size() != p.centers.size())
    throw InvariantError("dmp: needs at least 2 basis functions with one width each");
  for (std::size_t i = 0; i < p.centers.size(); ++i) {
    if (!(p.centers[i] > 0.0 && p.centers[i] <= 1.0)) throw InvariantError("dmp: basis centers must lie in (0, 1]");
    if (i > 0 && !(p.centers[i] < p.centers[i - 1])) throw InvariantError("dmp: basis centers must strictly decrease");
    if (!(p.widths[i] > 0.0) || !std::isfinite(p.widths[i])) throw InvariantError("dmp: basis widths must be > 0");
  }
  if (p.weights.rows() != static_cast<Eigen::Index>(p.centers.size()) || !p.weights.allFinite())
    throw InvariantError("dmp: weights must be finite with one row per basis function");
  if (!p.y0.allFinite() || !p.goal.allFinite() || !p.degenerate_scale.allFinite())
    throw InvariantError("dmp: endpoints must be finite");
}

/// Solution of tau * dx/dt = -alpha * x with x(0) = 1.
inline double canonical_phase(double alpha, double tau, double t) {
  if (!(tau > 0.0)) throw InvariantError("canonical_phase: tau must be > 0");
  if (!(alpha > 0.0)) throw InvariantError("canonical_phase: alpha must be > 0");
  if (t < 0.0) throw InvariantError("canonical_phase: t must be >= 0");
  return std::exp(-alpha * t / tau);
}

namespace detail {

/// Centers equally spaced in time over [0, tau] mapped through the canonical system;
/// widths chosen so adjacent activations cross at 0.55.
inline void place_basis(int n_basis, double alpha, std::vector<double>& centers, std::vector<double>& widths) {
  centers.resize(n_basis);
  widths.resize(n_basis);
  for (int i = 0; i < n_basis; ++i)
    centers[i] = std::exp(-alpha * static_cast<double>(i) / static_cast<double>(n_basis - 1));
  const double k = -4.0 * std::log(0.55);
  for (int i = 0; i + 1 < n_basis; ++i) {
    const double d = centers[i] - centers[i + 1];
    widths[i] = k / (d * d);
  }
  widths[n_basis - 1] = widths[n_basis - 2];
}

/// Normalized basis mixture sum(psi_i w_i) / sum(psi_i) for each dimension.
/// A zero-weight anchor at x = 0 joins the normalization so the forcing dies out
/// once the phase leaves the demonstrated range (x < last center).
inline Vec3 basis_mixture(const DmpParams& p, double x) {
  Vec3 num = Vec3::Zero();
  double den = std::exp(-p.widths.back() * x * x);
  for (int i = 0; i < p.n_basis(); ++i) {
    const double d = x - p.centers[i];
    const double psi = std::exp(-p.widths[i] * d * d);
    num += psi * p.weights.row(i).transpose();
    den += psi;
  }
  return den > 1e-300 ? Vec3(num / den) : Vec3::Zero();
}

/// First and second derivatives: central differences inside, one-sided at the ends.
inline void differentiate(const std::vector<double>& y, double dt, std::vector<double>& yd, std::vector<double>& ydd) {
  const std::size_t n = y.size();
  yd.assign(n, 0.0);
  ydd.assign(n, 0.0);
  for (std::size_t k = 1; k + 1 < n; ++k) {
    yd[k] = (y[k + 1] - y[k - 1]) / (2.0 * dt);
    ydd[k] = (y[k + 1] - 2.0 * y[k] + y[k - 1]) / (dt * dt);
  }
  yd[0] = (-3.0 * y[0] + 4.0 * y[1] - y[2]) / (2.0 * dt);
  yd[n - 1] = (3.0 * y[n - 1] - 4.0 * y[n - 2] + y[n - 3]) / (2.0 * dt);
  if (n >= 4) {
    ydd[0] = (2.0 * y[0] - 5.0 * y[1] + 4.0 * y[2] - y[3]) / (dt * dt);
    ydd[n - 1] = (2.0 * y[n - 1] - 5.0 * y[n - 2] + 4.0 * y[n - 3] - y[n - 4]) / (dt * dt);
  } else {
    ydd[0] = ydd[1];
    ydd[n - 1] = ydd[n - 2];
  }
}

}  // namespace detail

/// Fits forcing weights by locally weighted regression. Transformation system (velocity form):
///   tau * dz/dt = K (g - y) - D z + f,   tau * dy/dt = z,
///   f(x) = sum(psi_i w_i)/sum(psi_i) * x * (g - y0).
inline DmpParams learn_weights(const PositionTrajectory& demo, const DmpGains& gains = {}) {
  validate(demo);
  if (gains.n_basis < 2) throw InvariantError("learn_weights: n_basis must be >= 2");
  if (!(gains.K > 0.0) || !(gains.alpha > 0.0)) throw InvariantError("learn_weights: K and alpha must be > 0");

  DmpParams p;
  p.K = gains.K;
  p.D = gains.damping();
  p.alpha = gains.alpha;
  p.tau = demo.duration();
  p.y0 = demo.samples.front();
  p.goal = demo.samples.back();
  detail::place_basis(gains.n_basis, p.alpha, p.centers, p.widths);
  p.weights = Eigen::MatrixX3d::Zero(gains.n_basis, 3);

  const int n = demo.size();
  const double dt = demo.timestamps[1] - demo.timestamps[0];
  std::vector<double> x(n);
  for (int k = 0; k < n; ++k) x[k] = canonical_phase(p.alpha, p.tau, demo.timestamps[k] - demo.timestamps[0]);

  std::vector<std::vector<double>> psi(gains.n_basis, std::vector<double>(n));
  for (int i = 0; i < gains.n_basis; ++i)
    for (int k = 0; k < n; ++k) {
      const double d = x[k] - p.centers[i];
      psi[i][k] = std::exp(-p.widths[i] * d * d);
    }

  for (int dim = 0; dim < 3; ++dim) {
    std::vector<double> y(n), yd, ydd;
    for (int k = 0; k < n; ++k) y[k] = demo.samples[k][dim];
    detail::differentiate(y, dt, yd, ydd);

    const double g = p.goal[dim];
    double span = g - p.y0[dim];
    if (std::abs(span) < kDegenerateSpan) {
      // forcing scale falls back to the signed peak deviation of this dimension
      double peak = 0.0;
      for (int k = 0; k < n; ++k)
        if (std::abs(y[k] - p.y0[dim]) > std::abs(peak)) peak = y[k] - p.y0[dim];
      p.degenerate[dim] = true;
      p.degenerate_scale[dim] = peak;
      span = peak;
      if (std::abs(span) < kDegenerateSpan) continue;  // flat dimension: zero forcing
    }

    for (int i = 0; i < gains.n_basis; ++i) {
      double num = 0.0;
      double den = 0.0;
      for (int k = 0; k < n; ++k) {
        const double f_target = p.tau * p.tau * ydd[k] - p.K * (g - y[k]) + p.D * p.tau * yd[k];
        const double s = x[k] * span;
        num += psi[i][k] * s * f_target;
        den += psi[i][k] * s * s;
      }
      p.weights(i, dim) = den > 1e-300 ? num / den : 0.0;
    }
  }
  return p;
}

/// Forcing scale per dimension for start S and goal G.
inline Vec3 forcing_scale(const DmpParams& p, const Vec3& S, const Vec3& G) {
  Vec3 s = G - S;
  for (int d = 0; d < 3; ++d)
    if (p.degenerate[d]) s[d] = p.degenerate_scale[d];
  return s;
}

/// Lower bound on integration steps per time constant.
inline constexpr int kMinStepsPerTau = 1000;

/// Integrates the transformation system from rest at S toward G with semi-implicit Euler.
/// Returns N+1 samples on [0, duration]; duration defaults to tau. Each output interval is split
/// into equal sub-steps no longer than tau / kMinStepsPerTau so coarse grids keep the fit.

inline PositionTrajectory rollout(const DmpParams& p, const Vec3& S, const Vec3& G, int N, double tau,
                                  double duration = -1.0) {
  if (N < 2) throw InvariantError("rollout: N must be >= 2");
  if (!(tau > 0.0)) throw InvariantError("rollout: tau must be > 0");
  if (!S.allFinite() || !G.allFinite()) throw InvariantError("rollout: start and goal must be finite");
  if (duration <= 0.0) duration = tau;

  const Vec3 scale = forcing_scale(p, S, G);
  const double interval = duration / static_cast<double>(N);
  const int sub = std::max(1, static_cast<int>(std::ceil(interval * kMinStepsPerTau / tau - 1e-9)));
  const double dt = interval / sub;
  PositionTrajectory out;
  out.samples.resize(N + 1);
  out.timestamps = uniform_timestamps(N + 1, duration);

  Vec3 y = S;
  Vec3 z = Vec3::Zero();
  out.samples[0] = y;
  for (int k = 0; k < N; ++k) {
    for (int j = 0; j < sub; ++j) {
      const double x = std::exp(-p.alpha * ((k * sub + j) * dt) / tau);
      const Vec3 f = detail::basis_mixture(p, x).cwiseProduct(scale) * x;
      const Vec3 zdot = (p.K * (G - y) - p.D * z + f) / tau;
      z += zdot * dt;
      y += z * (dt / tau);
    }
    out.samples[k + 1] = y;
  }
  return out;
}

inline PositionTrajectory rollout(const DmpParams& p, const Vec3& S, const Vec3& G, int N) {
  return rollout(p, S, G, N, p.tau);
}

}  // namespace dualarm
