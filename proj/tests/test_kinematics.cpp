#include "dualarm/io/robot_io.hpp"
#include "dualarm/kinematics/collision.hpp"
#include "dualarm/kinematics/forward_kinematics.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace dualarm;

namespace {

const char* kMinimalDoc = R"({
  "name": "two_link",
  "hand_length": 0.1,
  "arms": {
    "left": {
      "joints": [
        {"name": "j0", "axis": [0, 0, 1], "limits": [-3, 3]},
        {"name": "j1", "origin": {"position": [0.5, 0, 0]}, "axis": [0, 0, 1], "limits": [-3, 3]}
      ],
      "frames": {
        "shoulder": {"joint": 0},
        "elbow": {"joint": 0},
        "wrist": {"joint": 1, "offset": {"position": [0.4, 0, 0]}},
        "hand_tip": {"joint": 1, "offset": {"position": [0.5, 0, 0]}}
      }
    }
  }
})";

RobotModel reference_model() { return io::load_robot_file(test::data_path("robots/reference_dual_arm.json")); }

/// Single revolute joint about z per arm; hand tip at (L, 0, 0) in the joint frame.
RobotModel planar_one_joint(double L) {
  RobotModel m;
  for (Arm arm : {Arm::Left, Arm::Right}) {
    KinematicChain c;
    c.joints.push_back({"j", Pose(), Vec3::UnitZ(), -kPi, kPi});
    c.frames = {NamedFrame{0, Pose()}, NamedFrame{-1, Pose()}, NamedFrame{0, Pose::translation(Vec3(L, 0, 0))},
                NamedFrame{0, Pose::translation(Vec3(L, 0, 0))}};
    (arm == Arm::Left ? m.left : m.right) = c;
  }
  m.right_base = Pose::translation(Vec3(0, -5, 0));
  return m;
}

VecX random_q(const RobotModel& m, std::mt19937_64& rng) {
  VecX q(m.dof());
  const VecX lo = m.lower_limits(), hi = m.upper_limits();
  for (int i = 0; i < m.dof(); ++i) q[i] = std::uniform_real_distribution<double>(lo[i], hi[i])(rng);
  return q;
}

// ---- independent oracle: homogeneous 4x4 products with Rodrigues rotations
Eigen::Matrix4d homogeneous(const Vec3& p, const Mat3& R) {
  Eigen::Matrix4d T = Eigen::Matrix4d::Identity();
  T.block<3, 3>(0, 0) = R;
  T.block<3, 1>(0, 3) = p;
  return T;
}
Mat3 rodrigues(const Vec3& axis, double angle) {
  Mat3 K;
  K << 0, -axis.z(), axis.y(), axis.z(), 0, -axis.x(), -axis.y(), axis.x(), 0;
  return Mat3::Identity() + std::sin(angle) * K + (1 - std::cos(angle)) * K * K;
}
Eigen::Matrix4d oracle_frame(const RobotModel& m, const VecX& q, Arm arm, FrameName name) {
  const KinematicChain& c = m.chain(arm);
  const Pose& b = m.base(arm);
  Eigen::Matrix4d T = homogeneous(b.position, b.orientation.toRotationMatrix());
  const int upto = c.frame(name).joint;
  for (int i = 0; i <= upto; ++i) {
    const Joint& j = c.joints[i];
    T = T * homogeneous(j.origin.position, j.origin.orientation.toRotationMatrix()) *
        homogeneous(Vec3::Zero(), rodrigues(j.axis, q[m.offset(arm) + i]));
  }
  const Pose& off = c.frame(name).offset;
  return T * homogeneous(off.position, off.orientation.toRotationMatrix());
}

}  // namespace

TEST(LoadRobot, MinimalSingleArmDocument) {
  const RobotModel m = io::load_robot(kMinimalDoc);
  EXPECT_EQ(m.dof(), 2);
  EXPECT_TRUE(m.right.empty());
  EXPECT_EQ(m.left.frame(FrameName::Wrist).joint, 1);
  const auto frames = forward_kinematics(m, VecX::Zero(2));
  EXPECT_TRUE(frames[static_cast<int>(FrameId::LTip)].position.isApprox(Vec3(1.0, 0, 0)));
}

TEST(LoadRobot, DegenerateJointLimit) {
  std::string doc = kMinimalDoc;
  doc.replace(doc.find("[-3, 3]"), 7, "[1, 1]");
  try {
    io::load_robot(doc);
    FAIL() << "expected InvariantError";
  } catch (const InvariantError& e) {
    EXPECT_NE(std::string(e.what()).find("degenerate joint limit"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("arms.left.joints[0]"), std::string::npos);
  }
}

TEST(LoadRobot, SyntaxErrorReportsLine) {
  try {
    io::load_robot("{\n  \"name\": \"x\",\n  \"arms\": [1,,2]\n}");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.locus().rfind("line 3", 0), 0u) << e.locus();
  }
}

TEST(LoadRobot, MissingFieldReportsPath) {
  std::string doc = kMinimalDoc;
  doc.replace(doc.find("\"axis\": [0, 0, 1], \"limits\""), 19, "");
  try {
    io::load_robot(doc);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.locus(), "arms.left.joints[0].axis");
  }
}

TEST(LoadRobot, RejectsAdjacentCollisionPair) {
  auto j = io::robot_to_json(reference_model());
  j["collision_pairs"].push_back({"l_upper_arm", "l_forearm"});
  EXPECT_THROW(io::robot_from_json(j), InvariantError);
  j = io::robot_to_json(reference_model());
  j["capsules"][0]["radius"] = 0.0;
  EXPECT_THROW(io::robot_from_json(j), InvariantError);
}

TEST(LoadRobot, ReferenceModelZeroPoseIsSymmetric) {
  const RobotModel m = reference_model();
  ASSERT_EQ(m.dof(), 14);
  const auto f = forward_kinematics(m, VecX::Zero(14));
  // arms hang straight down: wrist = shoulder - (upper + forearm) z
  EXPECT_TRUE(f[static_cast<int>(FrameId::LW)].position.isApprox(Vec3(0.0, 0.2, -0.56), 1e-12));
  EXPECT_TRUE(f[static_cast<int>(FrameId::RW)].position.isApprox(Vec3(0.0, -0.2, -0.56), 1e-12));
  EXPECT_TRUE(f[static_cast<int>(FrameId::LE)].position.isApprox(Vec3(0.0, 0.2, -0.30), 1e-12));
  EXPECT_TRUE(f[static_cast<int>(FrameId::LTip)].position.isApprox(Vec3(0.0, 0.2, -0.74), 1e-12));
}

TEST(LoadRobot, RoundTripThroughJson) {
  const RobotModel m = reference_model();
  const RobotModel m2 = io::robot_from_json(io::robot_to_json(m));
  EXPECT_EQ(io::robot_to_json(m).dump(), io::robot_to_json(m2).dump());
}

TEST(ForwardKinematics, PlanarOneJointChain) {
  const RobotModel m = planar_one_joint(0.7);
  VecX q = VecX::Zero(2);
  EXPECT_TRUE(forward_kinematics(m, q)[static_cast<int>(FrameId::LTip)].position.isApprox(Vec3(0.7, 0, 0)));
  q[0] = kPi / 2;
  EXPECT_LT((forward_kinematics(m, q)[static_cast<int>(FrameId::LTip)].position - Vec3(0, 0.7, 0)).norm(), 1e-15);
}

TEST(ForwardKinematics, DimensionMismatch) {
  const RobotModel m = reference_model();
  EXPECT_THROW(forward_kinematics(m, VecX::Zero(13)), DimensionError);
  VecX q = VecX::Zero(14);
  q[3] = NAN;
  EXPECT_THROW(forward_kinematics(m, q), DimensionError);
}

TEST(ForwardKinematics, MatchesMatrixChainOracle) {
  const RobotModel m = reference_model();
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 50; ++trial) {
    const VecX q = random_q(m, rng);
    const auto f = forward_kinematics(m, q);
    for (int id = 0; id < kFrameCount; ++id) {
      const auto fid = static_cast<FrameId>(id);
      const Eigen::Matrix4d T = oracle_frame(m, q, arm_of(fid), name_of(fid));
      EXPECT_LT((f[id].position - T.block<3, 1>(0, 3)).cwiseAbs().maxCoeff(), 1e-12);
      EXPECT_LT((f[id].rotation() - T.block<3, 3>(0, 0)).cwiseAbs().maxCoeff(), 1e-12);
    }
  }
}

TEST(ForwardKinematics, LinkLengthsAndUnitQuaternions) {
  const RobotModel m = reference_model();
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    const auto f = forward_kinematics(m, random_q(m, rng));
    for (Arm arm : {Arm::Left, Arm::Right}) {
      const Vec3 s = f[static_cast<int>(frame_id(arm, FrameName::Shoulder))].position;
      const Vec3 e = f[static_cast<int>(frame_id(arm, FrameName::Elbow))].position;
      const Vec3 w = f[static_cast<int>(frame_id(arm, FrameName::Wrist))].position;
      EXPECT_NEAR((e - s).norm(), 0.30, 1e-12);
      EXPECT_NEAR((w - e).norm(), 0.26, 1e-12);
    }
    for (const auto& p : f) EXPECT_NEAR(p.orientation.norm(), 1.0, 1e-9);
  }
}

TEST(FrameJacobian, PlanarRevoluteColumn) {
  const RobotModel m = planar_one_joint(0.7);
  const MatX J = frame_jacobian(m, VecX::Zero(2), FrameId::LTip);
  EXPECT_TRUE(J.col(0).isApprox((Eigen::Matrix<double, 6, 1>() << 0, 0.7, 0, 0, 0, 1).finished()));
  EXPECT_TRUE(J.col(1).isZero());
}

TEST(FrameJacobian, MatchesCentralDifferences) {
  const RobotModel m = reference_model();
  std::mt19937_64 rng(99);
  const double h = 1e-6;
  for (int trial = 0; trial < 100; ++trial) {
    const VecX q = random_q(m, rng);
    for (int id = 0; id < kFrameCount; ++id) {
      const auto fid = static_cast<FrameId>(id);
      const MatX J = frame_jacobian(m, q, fid);
      for (int j = 0; j < m.dof(); ++j) {
        VecX qp = q, qm = q;
        qp[j] += h;
        qm[j] -= h;
        const Pose fp = forward_kinematics(m, qp)[id];
        const Pose fm = forward_kinematics(m, qm)[id];
        const Vec3 lin = (fp.position - fm.position) / (2 * h);
        const Vec3 ang = log_map(fp.orientation * fm.orientation.conjugate()) / (2 * h);
        EXPECT_LT((J.block<3, 1>(0, j) - lin).cwiseAbs().maxCoeff(), 1e-5);
        EXPECT_LT((J.block<3, 1>(3, j) - ang).cwiseAbs().maxCoeff(), 1e-5);
      }
    }
  }
}

TEST(FrameJacobian, ChainIndependence) {
  const RobotModel m = reference_model();
  std::mt19937_64 rng(4);
  const MatX J = frame_jacobian(m, random_q(m, rng), FrameId::LE);
  EXPECT_TRUE(J.rightCols(7).isZero());
  // the elbow frame rides on the elbow link: forearm and wrist joints do not move it
  EXPECT_TRUE(J.middleCols(4, 3).isZero());
  EXPECT_TRUE(J.block(0, 3, 3, 1).isZero(1e-12));
}

TEST(FrameJacobian, UnknownFrame) {
  const RobotModel m = reference_model();
  EXPECT_THROW(frame_jacobian(m, VecX::Zero(14), static_cast<FrameId>(11)), DimensionError);
  EXPECT_THROW(parse_frame_id("LX"), DimensionError);
  EXPECT_EQ(parse_frame_id("R_tip"), FrameId::RTip);
}

namespace {
/// Two arms with one joint each; one capsule per arm along the local x axis.
RobotModel two_capsules(double separation) {
  RobotModel m = planar_one_joint(1.0);
  m.right_base = Pose::translation(Vec3(0, 0, separation));
  m.capsules.push_back({"a", CapsuleOwner::Left, 0, Vec3(0, 0, 0), Vec3(1, 0, 0), 0.1});
  m.capsules.push_back({"b", CapsuleOwner::Right, 0, Vec3(0, 0, 0), Vec3(1, 0, 0), 0.1});
  m.collision_pairs.emplace_back(0, 1);
  validate(m);
  return m;
}

double sampled_clearance(const RobotModel& m, const KinematicState& s) {
  constexpr int n = 1001;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& [ia, ib] : m.collision_pairs) {
    const WorldCapsule a = world_capsule(m, s, ia);
    const WorldCapsule b = world_capsule(m, s, ib);
    for (int i = 0; i < n; ++i) {
      const Vec3 pa = a.a + (a.b - a.a) * (static_cast<double>(i) / (n - 1));
      for (int k = 0; k < n; ++k) {
        const Vec3 pb = b.a + (b.b - b.a) * (static_cast<double>(k) / (n - 1));
        best = std::min(best, (pa - pb).norm() - a.radius - b.radius);
      }
    }
  }
  return best;
}
}  // namespace

TEST(MinClearance, ParallelCapsules) {
  const RobotModel m = two_capsules(0.5);
  EXPECT_NEAR(min_clearance(m, VecX::Zero(2)).distance, 0.3, 1e-12);
}

TEST(MinClearance, CoincidentAxes) {
  const RobotModel m = two_capsules(0.0);
  const auto c = min_clearance(m, VecX::Zero(2));
  EXPECT_NEAR(c.distance, -0.2, 1e-12);
  EXPECT_EQ(c.pair, 0);
}

TEST(MinClearance, MatchesDenseSamplingOracle) {
  const RobotModel m = reference_model();
  std::mt19937_64 rng(123);
  for (int trial = 0; trial < 4; ++trial) {
    const VecX q = random_q(m, rng);
    const auto s = compute_state(m, q);
    EXPECT_NEAR(min_clearance(m, s).distance, sampled_clearance(m, s), 1e-4);
  }
}

TEST(MinClearance, LipschitzInJointSpace) {
  const RobotModel m = reference_model();
  // every capsule point is within shoulder-to-tip reach of every joint axis
  const double lipschitz = 2.0 * (0.30 + 0.26 + 0.18);
  std::mt19937_64 rng(77);
  std::normal_distribution<double> N(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const VecX q = random_q(m, rng);
    VecX dq(14);
    for (int i = 0; i < 14; ++i) dq[i] = 1e-3 * N(rng);
    const double a = min_clearance(m, q).distance;
    const double b = min_clearance(m, q + dq).distance;
    EXPECT_LE(std::abs(a - b), lipschitz * dq.norm() + 1e-12);
  }
}

TEST(MinClearance, GradientMatchesFiniteDifferences) {
  const RobotModel m = reference_model();
  std::mt19937_64 rng(5);
  const double h = 1e-6;
  int checked = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const VecX q = random_q(m, rng);
    const auto s = compute_state(m, q);
    const auto pcs = pair_clearances(m, s);
    for (const auto& pc : pcs) {
      const VecX g = clearance_gradient(m, s, pc);
      VecX fd(m.dof());
      for (int j = 0; j < m.dof(); ++j) {
        VecX qp = q, qm = q;
        qp[j] += h;
        qm[j] -= h;
        fd[j] = (pair_clearances(m, compute_state(m, qp))[pc.pair].distance -
                 pair_clearances(m, compute_state(m, qm))[pc.pair].distance) / (2 * h);
      }
      EXPECT_LT((g - fd).cwiseAbs().maxCoeff(), 1e-5);
      ++checked;
    }
  }
  EXPECT_GT(checked, 0);
}
