#include "dualarm/dmp/dmp.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace dualarm;
using dualarm::test::rmse;

TEST(CanonicalPhase, StartsAtOne) { EXPECT_DOUBLE_EQ(canonical_phase(4.0, 1.0, 0.0), 1.0); }

TEST(CanonicalPhase, ClosedFormDecay) {
  // exp(-4) = 0.018315638888734...
  EXPECT_NEAR(canonical_phase(4.0, 1.0, 1.0), 0.0183156388887342, 1e-15);
}

TEST(CanonicalPhase, StrictlyDecreasing) {
  double prev = canonical_phase(4.0, 2.0, 0.0);
  for (double t = 0.05; t < 20.0; t += 0.05) {
    const double x = canonical_phase(4.0, 2.0, t);
    EXPECT_LT(x, prev);
    EXPECT_GT(x, 0.0);
    prev = x;
  }
  EXPECT_LT(canonical_phase(4.0, 1.0, 50.0), 1e-80);
}

TEST(CanonicalPhase, RejectsNonPositiveParameters) {
  EXPECT_THROW(canonical_phase(4.0, 0.0, 1.0), InvariantError);
  EXPECT_THROW(canonical_phase(0.0, 1.0, 1.0), InvariantError);
  EXPECT_THROW(canonical_phase(4.0, -1.0, 1.0), InvariantError);
}

TEST(LearnWeights, BasisCentersDecreaseAndDampingIsCritical) {
  std::mt19937_64 rng(3);
  const auto p = learn_weights(dualarm::test::smooth_demo(rng));
  ASSERT_EQ(p.n_basis(), 50);
  EXPECT_DOUBLE_EQ(p.centers.front(), 1.0);
  for (int i = 1; i < p.n_basis(); ++i) EXPECT_LT(p.centers[i], p.centers[i - 1]);
  EXPECT_DOUBLE_EQ(p.D, 2.0 * std::sqrt(p.K));
  EXPECT_TRUE(p.weights.allFinite());
}

TEST(LearnWeights, UnforcedDemoGivesNearZeroWeights) {
  // Closed-form critically damped response: y(t) = g + (y0 - g)(1 + w t) e^{-w t}, w = sqrt(K)/tau.
  // K = 400 so the response has settled at t = tau and the demo's last sample is the attractor.
  DmpGains gains;
  gains.K = 400.0;
  const double tau = 1.0;
  const Vec3 y0(0.1, -0.2, 0.3), g(0.5, 0.1, 0.2);
  const double w = std::sqrt(gains.K) / tau;
  PositionTrajectory demo;
  demo.timestamps = uniform_timestamps(5001, tau);
  for (double t : demo.timestamps) demo.samples.push_back(g + (y0 - g) * (1.0 + w * t) * std::exp(-w * t));

  const auto p = learn_weights(demo, gains);
  const double bound = 1e-3 * gains.K * (g - y0).norm();
  EXPECT_LT(p.weights.cwiseAbs().maxCoeff(), bound);
}

TEST(LearnWeights, MinimumJerkReproduction) {
  PositionTrajectory demo;
  demo.timestamps = uniform_timestamps(301, 3.0);
  const Vec3 y0(0.0, 0.0, 0.0), g(0.4, 0.0, 0.0);
  for (int k = 0; k < 301; ++k) demo.samples.push_back(y0 + (g - y0) * dualarm::test::min_jerk(k / 300.0));
  const auto p = learn_weights(demo);
  const auto out = rollout(p, p.y0, p.goal, 300);
  EXPECT_LE(rmse(out, demo), 0.01 * (g - y0).norm());
}

TEST(LearnWeights, DegenerateDimensionKeepsPeakDeviation) {
  // y dimension leaves and returns to its start: g == y0 there.
  PositionTrajectory demo;
  demo.timestamps = uniform_timestamps(201, 2.0);
  for (int k = 0; k < 201; ++k) {
    const double u = k / 200.0;
    demo.samples.emplace_back(0.3 * dualarm::test::min_jerk(u), 0.12 * std::pow(std::sin(kPi * u), 2), 0.05 * u * u * (3 - 2 * u));
  }
  const auto p = learn_weights(demo);
  EXPECT_TRUE(p.degenerate[1]);
  EXPECT_FALSE(p.degenerate[0]);
  const auto out = rollout(p, p.y0, p.goal, 200);
  double demo_peak = 0.0, out_peak = 0.0;
  for (int k = 0; k <= 200; ++k) {
    demo_peak = std::max(demo_peak, std::abs(demo[k].y() - p.y0.y()));
    out_peak = std::max(out_peak, std::abs(out[k].y() - p.y0.y()));
  }
  EXPECT_NEAR(out_peak, demo_peak, 0.1 * demo_peak);
}

TEST(LearnWeights, RejectsBadInput) {
  PositionTrajectory two;
  two.timestamps = {0.0, 1.0};
  two.samples = {Vec3::Zero(), Vec3::Ones()};
  EXPECT_THROW(learn_weights(two), InvariantError);
  std::mt19937_64 rng(1);
  DmpGains gains;
  gains.n_basis = 1;
  EXPECT_THROW(learn_weights(dualarm::test::smooth_demo(rng), gains), InvariantError);
  auto uneven = dualarm::test::smooth_demo(rng);
  uneven.timestamps[5] += 1e-4;
  EXPECT_THROW(learn_weights(uneven), InvariantError);
}

namespace {
DmpParams zero_weight_params(double tau) {
  DmpParams p;
  p.tau = tau;
  detail::place_basis(10, p.alpha, p.centers, p.widths);
  p.weights = Eigen::MatrixX3d::Zero(10, 3);
  return p;
}
}  // namespace

TEST(Rollout, UnforcedConvergesMonotonically) {
  const auto p = zero_weight_params(1.0);
  const auto out = rollout(p, Vec3::Zero(), Vec3(1, 0, 0), 200);
  for (int k = 1; k < out.size(); ++k) EXPECT_GE(out[k].x(), out[k - 1].x());
  EXPECT_LT((out.samples.back() - Vec3(1, 0, 0)).norm(), 1e-3);
}

TEST(Rollout, FixedPointWhenStartEqualsGoal) {
  const auto p = zero_weight_params(1.0);
  const Vec3 s(0.2, -0.1, 0.7);
  const auto out = rollout(p, s, s, 50);
  for (const auto& y : out.samples) EXPECT_EQ(y, s);
}

TEST(Rollout, TranslationEquivariance) {
  std::mt19937_64 rng(11);
  const auto p = learn_weights(dualarm::test::smooth_demo(rng));
  const Vec3 d(0.1, -0.2, 0.05);
  const auto a = rollout(p, p.y0, p.goal, 200);
  const auto b = rollout(p, p.y0 + d, p.goal + d, 200);
  for (int k = 0; k < a.size(); ++k) EXPECT_LE((b[k] - (a[k] + d)).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Rollout, GoalConvergenceAfterOneAndAHalfTau) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    const auto p = learn_weights(dualarm::test::smooth_demo(rng));
    const Vec3 S(U(rng), U(rng), U(rng)), G(U(rng), U(rng), U(rng));
    const auto out = rollout(p, S, G, 300, p.tau, 1.5 * p.tau);
    EXPECT_LE((out.samples.back() - G).norm(), 1e-3 * std::max(1.0, (G - S).norm()));
  }
}

TEST(Rollout, ReproducesSmoothDemos) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 5; ++trial) {
    const auto demo = dualarm::test::smooth_demo(rng);
    const auto p = learn_weights(demo);
    const auto out = rollout(p, p.y0, p.goal, demo.size() - 1);
    EXPECT_LE(rmse(out, demo), 0.01 * dualarm::test::max_axis_range(demo));
  }
}

TEST(Rollout, RejectsBadArguments) {
  const auto p = zero_weight_params(1.0);
  EXPECT_THROW(rollout(p, Vec3::Zero(), Vec3::Ones(), 1), InvariantError);
  EXPECT_THROW(rollout(p, Vec3::Zero(), Vec3::Ones(), 10, 0.0), InvariantError);
  EXPECT_THROW(rollout(p, Vec3(NAN, 0, 0), Vec3::Ones(), 10), InvariantError);
}
