// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.
#include "dualarm/cli/app.hpp"
#include "dualarm/io/robot_io.hpp"
#include "dualarm/retarget/startgoal.hpp"
#include "dualarm/trajopt/residuals.hpp"
#include "test_support.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>

using namespace dualarm;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;

void report(int id, const char* name, bool ok, const std::string& detail) {
  std::printf("[%s] %2d %-34s %s\n", ok ? "PASS" : "FAIL", id, name, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

RobotModel robot(const char* file) { return io::load_robot_file(test::data_path(std::string("robots/") + file)); }

Vec3 random_vec(std::mt19937_64& rng, double s) {
  std::uniform_real_distribution<double> U(-s, s);
  return {U(rng), U(rng), U(rng)};
}

VecX random_q(const RobotModel& m, std::mt19937_64& rng, double shrink = 0.9) {
  const VecX lo = m.lower_limits(), hi = m.upper_limits();
  VecX q(m.dof());
  for (int i = 0; i < m.dof(); ++i) {
    const double mid = 0.5 * (lo[i] + hi[i]), half = 0.5 * shrink * (hi[i] - lo[i]);
    q[i] = std::uniform_real_distribution<double>(mid - half, mid + half)(rng);
  }
  return q;
}

MatX central_difference(const std::function<VecX(const VecX&)>& f, const VecX& q, double h = 1e-6) {
  const VecX f0 = f(q);
  MatX J(f0.size(), q.size());
  for (int i = 0; i < q.size(); ++i) {
    VecX a = q, b = q;
    a[i] += h;
    b[i] -= h;
    J.col(i) = (f(a) - f(b)) / (2 * h);
  }
  return J;
}

Demonstration self_demo(const RobotModel& m, int rows) {
  VecX a = VecX::Zero(m.dof()), b = VecX::Zero(m.dof());
  for (int side = 0; side < 2; ++side) {
    const int o = side * 7;
    a.segment(o, 4) << 0.6, 0.2, 0.0, 0.8;
    b.segment(o, 4) << 1.0, 0.3, 0.2, 1.2;
    b[o + 5] = 0.4;
  }
  JointTrajectory Q;
  Q.q.resize(rows, m.dof());
  Q.timestamps = uniform_timestamps(rows, 2.0);
  for (int i = 0; i < rows; ++i) Q.q.row(i) = (a + (b - a) * test::min_jerk(i / (rows - 1.0))).transpose();
  return synth_from_robot(m, Q);
}

template <typename P, typename D>
double brute_force_frechet(const std::vector<P>& A, const std::vector<P>& B, D dist) {
  double best = std::numeric_limits<double>::infinity();
  std::function<void(std::size_t, std::size_t, double)> walk = [&](std::size_t i, std::size_t j, double bottleneck) {
    bottleneck = std::max(bottleneck, dist(A[i], B[j]));
    if (i + 1 == A.size() && j + 1 == B.size()) {
      best = std::min(best, bottleneck);
      return;
    }
    if (i + 1 < A.size()) walk(i + 1, j, bottleneck);
    if (j + 1 < B.size()) walk(i, j + 1, bottleneck);
    if (i + 1 < A.size() && j + 1 < B.size()) walk(i + 1, j + 1, bottleneck);
  };
  walk(0, 0, 0.0);
  return best;
}

std::vector<Vec3> random_points(std::mt19937_64& rng, int n) {
  std::vector<Vec3> out(n);
  for (auto& p : out) p = random_vec(rng, 1.0);
  return out;
}

// ---------------------------------------------------------------- criteria

void dmp_fidelity() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(101);
  double worst_ratio = 0.0;
  for (int k = 0; k < 20; ++k) {
    const auto demo = test::smooth_demo(rng);
    const auto p = learn_weights(demo);
    const auto out = rollout(p, p.y0, p.goal, demo.size() - 1);
    worst_ratio = std::max(worst_ratio, test::rmse(out, demo) / test::max_axis_range(demo));
  }
  double worst_end = 0.0;
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (int k = 0; k < 100; ++k) {
    const auto p = learn_weights(test::smooth_demo(rng));
    const Vec3 S(U(rng), U(rng), U(rng)), G(U(rng), U(rng), U(rng));
    const auto out = rollout(p, S, G, 300, p.tau, 1.5 * p.tau);
    worst_end = std::max(worst_end, (out.samples.back() - G).norm() / (1e-3 * std::max(1.0, (G - S).norm())));
  }
  const double t = seconds_since(t0);
  report(1, "DMP fidelity", worst_ratio <= 0.01 && worst_end <= 1.0 && t < 5.0,
         fmt("worst RMSE %.4f%% of range (<= 1%%), worst endpoint %.3f of bound (<= 1), %.2f s (< 5 s)",
             100 * worst_ratio, worst_end, t));
}

void superposition() {
  MotionFamily f;
  f.family = Family::Clap;
  const CoordinationModel m = train_model(synth_demo(f, 0), robot("compact_dual_arm.json"));
  std::mt19937_64 rng(102);
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    StartGoalSet sg = m.original;
    for (int i = 0; i < 4; ++i) {
      sg.S[i] += random_vec(rng, 0.1);
      sg.G[i] += random_vec(rng, 0.1);
    }
    const ReferenceSet r = reproduce(m, sg, 120);
    const auto lrw = rollout(m.dmp[1], sg.S[1], sg.G[1], 120);
    const auto lew = rollout(m.dmp[2], sg.S[2], sg.G[2], 120);
    const auto rew = rollout(m.dmp[3], sg.S[3], sg.G[3], 120);
    for (int i = 0; i < r.size(); ++i) {
      worst = std::max(worst, ((r.LW[i] - r.RW[i]) - lrw[i]).cwiseAbs().maxCoeff());
      worst = std::max(worst, ((r.LE[i] - r.LW[i]) - lew[i]).cwiseAbs().maxCoeff());
      worst = std::max(worst, ((r.RE[i] - r.RW[i]) - rew[i]).cwiseAbs().maxCoeff());
    }
  }
  report(2, "Superposition consistency", worst <= 1e-12, fmt("max identity error %.3g (<= 1e-12)", worst));
}

void jacobians() {
  const RobotModel m = robot("reference_dual_arm.json");
  std::mt19937_64 rng(103);
  double tracking = 0, collision = 0, potential = 0, limit = 0, smooth = 0, frame = 0;

  CostWeights w;
  w.w_elbow_pos = 0.3;
  for (int k = 0; k < 50; ++k) {
    const VecX q = random_q(m, rng);
    const StepTargets t = targets_from_fk(forward_kinematics(m, VecX(q + 0.3 * random_q(m, rng).normalized())));
    const MatX J = tracking_residual(m, q, t, w).J;
    const MatX Jfd = central_difference(
        [&](const VecX& x) { return tracking_residual(m, compute_state(m, x), t, w, false).r; }, q);
    tracking = std::max(tracking, (J - Jfd).cwiseAbs().maxCoeff());
  }

  CostWeights wide;
  wide.d_safe = 0.25;  // many active pairs
  for (int checked = 0; checked < 50;) {
    const VecX q = random_q(m, rng, 0.7);
    bool ok = true;  // away from the hinge boundary and touching axes
    for (const auto& pc : pair_clearances(m, compute_state(m, q)))
      if (std::abs(pc.distance - wide.d_safe) < 1e-3 || (pc.point_a - pc.point_b).norm() < 1e-3) ok = false;
    if (!ok) continue;
    ++checked;
    const MatX J = collision_residual(m, compute_state(m, q), wide).J;
    const MatX Jfd = central_difference(
        [&](const VecX& x) { return collision_residual(m, compute_state(m, x), wide, false).r; }, q);
    collision = std::max(collision, (J - Jfd).cwiseAbs().maxCoeff());
  }

  for (int checked = 0; checked < 50;) {
    const VecX q = random_q(m, rng, 0.7);
    const auto pcs = pair_clearances(m, compute_state(m, q));
    std::vector<double> d;
    for (const auto& pc : pcs) d.push_back(pc.distance);
    std::sort(d.begin(), d.end());
    if (d.size() > 1 && d[1] - d[0] < 1e-3) continue;
    const auto closest = std::min_element(pcs.begin(), pcs.end(),
                                          [](const auto& a, const auto& b) { return a.distance < b.distance; });
    if ((closest->point_a - closest->point_b).norm() < 1e-3) continue;
    ++checked;
    const double d_safe = std::max(d[0], 0.0) + 0.1;
    const VecX g = collision_potential(m, q, d_safe).gradient;
    const MatX gfd = central_difference(
        [&](const VecX& x) { return VecX::Constant(1, collision_potential(m, x, d_safe).value); }, q);
    potential = std::max(potential, (g.transpose() - gfd).cwiseAbs().maxCoeff());
  }

  for (int k = 0; k < 50; ++k) {
    VecX q = random_q(m, rng, 1.4);
    const VecX lo = m.lower_limits(), hi = m.upper_limits();
    for (int i = 0; i < q.size(); ++i)
      if (std::abs(q[i] - lo[i]) < 1e-3 || std::abs(q[i] - hi[i]) < 1e-3) q[i] += 0.01;
    const MatX J = limit_residual(m, q, 9.0).J;
    const MatX Jfd = central_difference([&](const VecX& x) { return limit_residual(m, x, 9.0, false).r; }, q);
    limit = std::max(limit, (J - Jfd).cwiseAbs().maxCoeff());
  }

  // first difference: d/dq_n = +sqrt(w) I, d/dq_{n-1} = -sqrt(w) I
  const double ws = 0.37;
  for (int k = 0; k < 50; ++k) {
    JointTrajectory Q;
    Q.q.resize(2, m.dof());
    Q.q.row(0) = random_q(m, rng).transpose();
    Q.q.row(1) = random_q(m, rng).transpose();
    Q.timestamps = {0.0, 1.0};
    const VecX x(Eigen::Map<const VecX>(Q.q.data(), Q.q.size()));  // column-major: row index fastest
    const MatX Jfd = central_difference(
        [&](const VecX& v) {
          JointTrajectory P = Q;
          P.q = Eigen::Map<const MatX>(v.data(), 2, m.dof());
          return smoothness_residual(P, 1, ws);
        },
        x);
    MatX J = MatX::Zero(m.dof(), 2 * m.dof());
    for (int j = 0; j < m.dof(); ++j) {
      J(j, 2 * j) = -std::sqrt(ws);
      J(j, 2 * j + 1) = std::sqrt(ws);
    }
    smooth = std::max(smooth, (J - Jfd).cwiseAbs().maxCoeff());
  }

  const double h = 1e-6;
  for (int k = 0; k < 50; ++k) {
    const VecX q = random_q(m, rng);
    for (int id = 0; id < kFrameCount; ++id) {
      const MatX J = frame_jacobian(m, q, static_cast<FrameId>(id));
      for (int j = 0; j < m.dof(); ++j) {
        VecX qp = q, qm = q;
        qp[j] += h;
        qm[j] -= h;
        const Pose fp = forward_kinematics(m, qp)[id], fm = forward_kinematics(m, qm)[id];
        const Vec3 lin = (fp.position - fm.position) / (2 * h);
        const Vec3 ang = log_map(fp.orientation * fm.orientation.conjugate()) / (2 * h);
        frame = std::max({frame, (J.block<3, 1>(0, j) - lin).cwiseAbs().maxCoeff(),
                          (J.block<3, 1>(3, j) - ang).cwiseAbs().maxCoeff()});
      }
    }
  }
  const double residual = std::max({tracking, collision, potential, limit, smooth});
  report(3, "Jacobian correctness", residual <= 1e-4 && frame <= 1e-5,
         fmt("residuals max %.2g [track %.1g col %.1g pot %.1g lim %.1g smooth %.1g] (<= 1e-4), frames %.2g (<= 1e-5)",
             residual, tracking, collision, potential, limit, smooth, frame));
}

void frechet_oracle() {
  std::mt19937_64 rng(104);
  auto euclid = [](const Vec3& a, const Vec3& b) { return (a - b).norm(); };
  std::uniform_int_distribution<int> len(1, 8);
  int mismatches = 0;
  for (int k = 0; k < 200; ++k) {
    const auto A = random_points(rng, len(rng)), B = random_points(rng, len(rng));
    if (discrete_frechet(A, B) != brute_force_frechet(A, B, euclid)) ++mismatches;
  }
  std::uniform_int_distribution<int> len2(1, 30);
  int violations = 0;
  for (int k = 0; k < 1000; ++k) {
    const int n = len2(rng);
    const auto A = random_points(rng, n);
    const auto B = random_points(rng, k % 2 ? n : len2(rng));
    const double f = discrete_frechet(A, B);
    if (f != discrete_frechet(B, A)) ++violations;
    if (f < std::max(euclid(A.front(), B.front()), euclid(A.back(), B.back()))) ++violations;
    if (A.size() == B.size()) {
      double diag = 0.0;
      for (std::size_t i = 0; i < A.size(); ++i) diag = std::max(diag, euclid(A[i], B[i]));
      if (f > diag) ++violations;
    }
  }
  report(4, "Frechet oracle equivalence", mismatches == 0 && violations == 0,
         fmt("%d/200 oracle mismatches, %d bound violations over 1000 pairs", mismatches, violations));
}

void cost_floors() {
  std::mt19937_64 rng(105);
  int off_floor = 0, moved = 0;
  for (int k = 0; k < 100; ++k) {
    StartGoalSet sg;
    for (int i = 0; i < 4; ++i) {
      sg.S[i] = random_vec(rng, 0.5);
      sg.G[i] = sg.S[i] + random_vec(rng, 0.3);
    }
    for (int i = 0; i < 4; ++i) {
      if (scale_cost(sg.S[i], sg.G[i], sg.S[i], sg.G[i]) - 1.0 != 0.0) ++off_floor;
      if (orientation_cost(sg.S[i], sg.G[i], sg.S[i], sg.G[i]).value != 0.0) ++off_floor;
      if (relative_cost(sg.S[i], sg.G[i], sg.S[i], sg.G[i]) != 0.0) ++off_floor;
    }
    if (startgoal_objective(sg, sg, StartGoalWeights{}) != 0.0) ++off_floor;
    if (optimize_startgoals(sg, sg, StartGoalWeights{}).max_abs_difference(sg) != 0.0) ++moved;
  }
  report(5, "Cost-function floors", off_floor == 0 && moved == 0,
         fmt("%d cost evaluations off the floor, %d/100 optimizer runs moved", off_floor, moved));
}

void self_retarget() {
  const auto t0 = Clock::now();
  const RobotModel m = robot("reference_dual_arm.json");
  const Demonstration d = self_demo(m, 41);
  const RetargetResult r = retarget_pipeline(d, m);
  const SimilarityReport rep = evaluate_result(d, r, m);
  const double worst = *std::max_element(rep.frechet.begin(), rep.frechet.end());
  const double sg_dev = r.sg.max_abs_difference(train_model(d, m).original);
  const double t = seconds_since(t0);
  const bool ok = r.feasible && r.rounds.size() == 1 && worst <= 0.02 && sg_dev <= 1e-6 && t < 60.0;
  report(6, "Self-retargeting fixed point", ok,
         fmt("feasible=%d rounds=%zu, worst entry %.4f (<= 0.02), sg deviation %.2g (<= 1e-6), %.1f s (< 60 s)",
             r.feasible, r.rounds.size(), worst, sg_dev, t));
}

struct SuiteRun {
  Demonstration demo;
  std::string method;
  RetargetResult result;
  SimilarityReport report;
};

std::vector<SuiteRun> run_suite(const RobotModel& m, const RetargetConfig& c) {
  std::vector<SuiteRun> out;
  for (Family f : {Family::MirrorArc, Family::Clap, Family::ConvergeTap, Family::SequentialWave, Family::FigureEight}) {
    MotionFamily mf;
    mf.family = f;
    const Demonstration d = synth_demo(mf, 0);
    for (const auto& method : cli::detail::method_names()) {
      RetargetResult r = cli::detail::run_method(method, d, m, c);
      SimilarityReport rep = evaluate_result(d, r, m, c.max_step);
      out.push_back({d, method, std::move(r), std::move(rep)});
    }
  }
  return out;
}

void success_rates(const std::vector<SuiteRun>& runs, double seconds) {
  std::map<std::string, std::pair<int, int>> rate;
  for (const auto& r : runs) {
    auto& [ok, n] = rate[r.method];
    ++n;
    ok += r.result.feasible ? 1 : 0;
  }
  auto pct = [&](const char* m) { return 100.0 * rate[m].first / rate[m].second; };
  const bool ok = pct("ours") == 100.0 && pct("pure-ik") <= 40.0 && pct("pos-scaling") <= 40.0 && seconds < 600.0;
  report(7, "Success rates on compact robot", ok,
         fmt("ours %.0f%% (100%%), pure-ik %.0f%% (<= 40%%), pos-scaling %.0f%% (<= 40%%), %.0f s (< 600 s)", pct("ours"),
             pct("pure-ik"), pct("pos-scaling"), seconds));
}

void relative_coordination(const std::vector<SuiteRun>& runs) {
  bool ok = true;
  std::string detail;
  for (const char* motion : {"clap", "converge-tap"}) {
    const SimilarityReport *ours = nullptr, *ps = nullptr;
    for (const auto& r : runs) {
      if (r.demo.name != motion) continue;
      if (r.method == "ours") ours = &r.report;
      if (r.method == "pos-scaling") ps = &r.report;
    }
    detail += std::string(detail.empty() ? "" : "; ") + motion + ":";
    for (const char* col : {"LRW", "LEW", "REW"}) {
      const bool better = ours->at(col) < ps->at(col);
      ok = ok && better;
      detail += fmt(" %s %.3f%s%.3f", col, ours->at(col), better ? "<" : ">=", ps->at(col));
    }
    ok = ok && ours->contact_error <= 0.01;
    detail += fmt(" contact %.4f m (<= 0.01)", ours->contact_error);
  }
  report(8, "Relative-coordination preservation", ok, detail);
}

void feasibility_soundness(const RobotModel& m, const RetargetConfig& c, const std::vector<SuiteRun>& runs) {
  int checked = 0, unsound = 0;
  for (const auto& r : runs) {
    if (!r.result.feasible) continue;
    ++checked;
    if (!dense_feasibility(m, r.result.Q, 0.5 * c.max_step).violations.empty()) ++unsound;
  }
  report(9, "Feasibility soundness", unsound == 0,
         fmt("%d/%d feasible results fail the half-step re-check", unsound, checked));
}

void determinism() {
  const auto dir = std::filesystem::temp_directory_path() / "dualarm_acceptance";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  const std::string robot_path = test::data_path("robots/reference_dual_arm.json");
  std::string files[2];
  int codes[2];
  for (int k = 0; k < 2; ++k) {
    const std::string out = (dir / ("run" + std::to_string(k) + ".json")).string();
    std::ostringstream so, se;
    codes[k] = cli::run_command({"dualarm", "--seed", "7", "compare", "--suite", "--suite-noise", "0.002", "--robot",
                                 robot_path, "--out", out, "--jobs", "1"},
                                so, se);
    files[k] = codes[k] == 0 ? io::read_file(out) : "";
  }
  std::filesystem::remove_all(dir);
  const bool ok = codes[0] == 0 && codes[1] == 0 && !files[0].empty() && files[0] == files[1];
  report(10, "Determinism", ok,
         fmt("exit codes %d/%d, report files %s (%zu bytes)", codes[0], codes[1],
             files[0] == files[1] ? "byte-identical" : "differ", files[0].size()));
}

}  // namespace

int main() {
  try {
    dmp_fidelity();
    superposition();
    jacobians();
    frechet_oracle();
    cost_floors();
    self_retarget();

    const RobotModel compact = robot("compact_dual_arm.json");
    const RetargetConfig c;
    const auto t0 = Clock::now();
    const auto runs = run_suite(compact, c);
    success_rates(runs, seconds_since(t0));
    relative_coordination(runs);
    feasibility_soundness(compact, c, runs);

    determinism();
  } catch (const std::exception& e) {
    std::printf("[FAIL] aborted: %s\n", e.what());
    return 2;
  }
  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
