#pragma once

#include "dualarm/trajopt/block_tridiagonal.hpp"
#include "dualarm/trajopt/residuals.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <limits>
#include <variant>
#include <vector>

namespace dualarm {

struct SolverSettings {
  int max_iterations = 200;
  double lambda0 = 1e-3;
  double relative_tolerance = 1e-8;
  /// Phase-1 prioritized IK.
  int ik_iterations_first = 300;
  int ik_iterations = 60;
  double ik_damping = 1e-2;
  double ik_max_step = 0.3;
  /// Per-iteration task error clamps (m, rad): IK follows a bounded path instead of the raw error.
  double ik_max_position_error = 0.1;
  double ik_max_rotation_error = 0.5;
  /// Run the full-trajectory least-squares phase after the IK seed.
  bool refine = true;
  /// Tracking tolerance used for the converged flag.
  double wrist_pos_tolerance = 0.005;
  double wrist_ori_tolerance = 3.0 * kPi / 180.0;
};

struct CostReport {
  double tracking = 0.0;
  double collision = 0.0;
  double smoothness = 0.0;
  double limit = 0.0;
  int iterations = 0;
  /// Stationary and tracking within tolerance.
  bool converged = false;
  /// The least-squares iteration stopped on the relative-decrease rule.
  bool stationary = false;
  /// Largest joint-limit excess or capsule penetration over the rows.
  double max_violation = 0.0;
  double wrist_pos_rmse = 0.0;
  double wrist_ori_rmse = 0.0;
  double elbow_pos_rmse = 0.0;
  /// Total cost after initialization and after every accepted step.
  std::vector<double> cost_history;

  double total() const { return tracking + collision + smoothness + limit; }
};

struct TrackingErrors {
  double wrist_pos_rmse = 0.0;
  double wrist_ori_rmse = 0.0;
  double elbow_pos_rmse = 0.0;
};

/// RMSE over both wrists (position norm, geodesic angle) and both elbows.
inline TrackingErrors tracking_errors(const RobotModel& m, const JointTrajectory& Q, const ReferenceTargets& refs) {
  if (Q.q.rows() != refs.size()) throw DimensionError("tracking errors: length mismatch");
  TrackingErrors e;
  for (int n = 0; n < refs.size(); ++n) {
    const auto f = forward_kinematics(m, Q.q.row(n).transpose());
    auto at = [&](FrameId id) { return f[static_cast<int>(id)]; };
    const auto& t = refs[n];
    e.wrist_pos_rmse += (at(FrameId::LW).position - t.LW).squaredNorm() + (at(FrameId::RW).position - t.RW).squaredNorm();
    e.wrist_ori_rmse += std::pow(geodesic_angle(at(FrameId::LW).orientation, t.R_LW), 2) +
                        std::pow(geodesic_angle(at(FrameId::RW).orientation, t.R_RW), 2);
    e.elbow_pos_rmse += (at(FrameId::LE).position - t.LE).squaredNorm() + (at(FrameId::RE).position - t.RE).squaredNorm();
  }
  const double k = 2.0 * refs.size();
  e.wrist_pos_rmse = std::sqrt(e.wrist_pos_rmse / k);
  e.wrist_ori_rmse = std::sqrt(e.wrist_ori_rmse / k);
  e.elbow_pos_rmse = std::sqrt(e.elbow_pos_rmse / k);
  return e;
}

// ---------------------------------------------------------------- phase 1

/// Diagnostics of one prioritized IK step.
struct IkStep {
  VecX dq_primary;
  VecX dq_secondary;
  MatX J_wrist;
};

/// Orthogonal projector onto the nullspace of J (exact SVD rank, not the damped one).
inline MatX nullspace_projector(const MatX& J) {
  Eigen::JacobiSVD<MatX> svd(J, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double cut = 1e-9 * (sv.size() ? sv[0] : 0.0);
  int rank = 0;
  while (rank < sv.size() && sv[rank] > cut) ++rank;
  const MatX Vr = svd.matrixV().leftCols(rank);
  return MatX::Identity(J.cols(), J.cols()) - Vr * Vr.transpose();
}

inline VecX damped_pseudo_solve(const MatX& J, const VecX& e, double damping) {
  MatX A = J * J.transpose();
  A.diagonal().array() += damping * damping;
  return J.transpose() * A.ldlt().solve(e);
}

/// One step: damped least squares on the wrist poses, elbow correction inside the wrist nullspace.
/// Joints flagged in `locked` are held fixed; both tasks are solved over the remaining columns.
inline IkStep prioritized_ik_step(const RobotModel& m, const VecX& q, const StepTargets& t, const CostWeights& w,
                                  double damping, const std::vector<bool>& locked = {},
                                  double max_position_error = std::numeric_limits<double>::infinity(),
                                  double max_rotation_error = std::numeric_limits<double>::infinity()) {
  Linearized lin = tracking_residual(m, compute_state(m, q), t, w);
  // residual blocks carry sqrt(weight); clamp in physical units
  auto clamp_block = [&](int row, double weight, double limit) {
    const double bound = std::sqrt(weight) * limit, n = lin.r.segment<3>(row).norm();
    if (n > bound) lin.r.segment<3>(row) *= bound / n;
  };
  for (int row : {0, 6}) {
    clamp_block(row, w.w_wrist_pos, max_position_error);
    clamp_block(row + 3, w.w_wrist_ori, max_rotation_error);
  }
  for (int row : {12, 15}) clamp_block(row, w.w_elbow_pos, max_position_error);
  std::vector<int> free;
  for (int i = 0; i < m.dof(); ++i)
    if (locked.empty() || !locked[i]) free.push_back(i);
  const int k = static_cast<int>(free.size());
  MatX J1(12, k), J2(6, k);
  for (int c = 0; c < k; ++c) {
    J1.col(c) = lin.J.block(0, free[c], 12, 1);
    J2.col(c) = lin.J.block(12, free[c], 6, 1);
  }
  const VecX e1 = lin.r.head(12), e2 = lin.r.tail(6);
  const VecX d1 = damped_pseudo_solve(J1, -e1, damping);
  const MatX N = nullspace_projector(J1);
  const VecX d2 = N * damped_pseudo_solve(J2 * N, -e2 - J2 * d1, damping);

  IkStep step;
  step.J_wrist = lin.J.topRows(12);
  step.dq_primary = VecX::Zero(m.dof());
  step.dq_secondary = VecX::Zero(m.dof());
  for (int c = 0; c < k; ++c) {
    step.dq_primary[free[c]] = d1[c];
    step.dq_secondary[free[c]] = d2[c];
  }
  return step;
}

/// Iterated prioritized IK. A joint resting on a limit whose step points outward is locked and
/// the step re-solved, so the remaining joints keep making progress instead of stalling.
inline VecX prioritized_ik(const RobotModel& m, VecX q, const StepTargets& t, const CostWeights& w,
                           const SolverSettings& s, int iterations) {
  const VecX lo = m.lower_limits(), hi = m.upper_limits();
  // start strictly inside the box: a joint resting on a limit is often also at a singularity
  // (a straight elbow), where the first-order step cannot tell which way to bend
  const VecX margin = (0.02 * (hi - lo)).cwiseMin(VecX::Constant(m.dof(), 0.05));
  q = q.cwiseMax(lo + margin).cwiseMin(hi - margin);
  for (int it = 0; it < iterations; ++it) {
    std::vector<bool> locked(m.dof(), false);
    VecX dq;
    for (int pass = 0; pass <= m.dof(); ++pass) {
      const IkStep st = prioritized_ik_step(m, q, t, w, s.ik_damping, locked, s.ik_max_position_error,
                                            s.ik_max_rotation_error);
      dq = st.dq_primary + st.dq_secondary;
      bool changed = false;
      for (int i = 0; i < m.dof(); ++i) {
        const bool outward = (q[i] >= hi[i] && dq[i] > 0.0) || (q[i] <= lo[i] && dq[i] < 0.0);
        if (outward && !locked[i]) locked[i] = changed = true;
      }
      if (!changed) break;
    }
    const double big = dq.cwiseAbs().maxCoeff();
    if (big > s.ik_max_step) dq *= s.ik_max_step / big;
    const VecX next = m.clamp_to_limits(q + dq);
    const double moved = (next - q).norm();
    q = next;
    if (moved < 1e-10) break;
  }
  return q;
}

/// Per-timestep IK seed, warm-started from the previous step's solution.
inline JointTrajectory prioritized_ik_trajectory(const RobotModel& m, const ReferenceTargets& refs, const VecX& seed,
                                                 const CostWeights& w, const SolverSettings& s) {
  JointTrajectory Q;
  Q.q.resize(refs.size(), m.dof());
  VecX q = seed;
  for (int n = 0; n < refs.size(); ++n) {
    q = prioritized_ik(m, q, refs[n], w, s, n == 0 ? s.ik_iterations_first : s.ik_iterations);
    Q.q.row(n) = q.transpose();
  }
  return Q;
}

// ---------------------------------------------------------------- phase 2

namespace detail {

struct StepBlock {
  VecX r;
  MatX J;
  double tracking = 0.0, collision = 0.0, limit = 0.0;
};

inline StepBlock linearize_step(const RobotModel& m, const VecX& q, const StepTargets& t, const CostWeights& w,
                                bool with_jacobian) {
  const KinematicState s = compute_state(m, q);
  const Linearized tr = tracking_residual(m, s, t, w, with_jacobian);
  const Linearized co = collision_residual(m, s, w, with_jacobian);
  const Linearized li = limit_residual(m, q, w.w_limit, with_jacobian);
  StepBlock b;
  b.tracking = tr.r.squaredNorm();
  b.collision = co.r.squaredNorm();
  b.limit = li.r.squaredNorm();
  b.r.resize(tr.r.size() + co.r.size() + li.r.size());
  b.r << tr.r, co.r, li.r;
  if (with_jacobian) {
    b.J.resize(b.r.size(), m.dof());
    b.J << tr.J, co.J, li.J;
  }
  return b;
}

struct TrajectoryCost {
  double tracking = 0.0, collision = 0.0, smoothness = 0.0, limit = 0.0;
  double total() const { return tracking + collision + smoothness + limit; }
};

inline TrajectoryCost evaluate(const RobotModel& m, const MatX& Q, const ReferenceTargets& refs, const CostWeights& w,
                               std::vector<StepBlock>* blocks) {
  TrajectoryCost c;
  if (blocks) blocks->resize(Q.rows());
  for (int n = 0; n < Q.rows(); ++n) {
    StepBlock b = linearize_step(m, Q.row(n).transpose(), refs[n], w, blocks != nullptr);
    c.tracking += b.tracking;
    c.collision += b.collision;
    c.limit += b.limit;
    if (blocks) (*blocks)[n] = std::move(b);
  }
  for (int n = 1; n < Q.rows(); ++n) c.smoothness += w.w_smooth * (Q.row(n) - Q.row(n - 1)).squaredNorm();
  return c;
}

inline MatX clamp_rows(const RobotModel& m, MatX Q) {
  const VecX lo = m.lower_limits(), hi = m.upper_limits();
  for (int n = 0; n < Q.rows(); ++n)
    Q.row(n) = Q.row(n).cwiseMax(lo.transpose()).cwiseMin(hi.transpose());
  return Q;
}

inline double max_violation(const RobotModel& m, const MatX& Q) {
  const VecX lo = m.lower_limits(), hi = m.upper_limits();
  double v = 0.0;
  for (int n = 0; n < Q.rows(); ++n) {
    const VecX q = Q.row(n).transpose();
    v = std::max({v, (q - hi).maxCoeff(), (lo - q).maxCoeff()});
    const double c = min_clearance(m, q).distance;
    if (std::isfinite(c)) v = std::max(v, -c);
  }
  return v;
}

}  // namespace detail

/// Seed pose for phase 1, or a full trajectory to warm-start phase 2 directly.
using SolveInit = std::variant<VecX, JointTrajectory>;

struct SolveResult {
  JointTrajectory Q;
  CostReport report;
};

/// Levenberg-Marquardt over the whole trajectory. Normal equations are block-tridiagonal
/// (per-step blocks coupled by the smoothness term) and solved by block elimination.
inline SolveResult refine_trajectory(const RobotModel& m, const ReferenceTargets& refs, const CostWeights& w,
                                     const SolverSettings& s, JointTrajectory Q) {
  const int T = refs.size(), n = m.dof();
  Q.q = detail::clamp_rows(m, Q.q);
  std::vector<detail::StepBlock> blocks;
  detail::TrajectoryCost cost = detail::evaluate(m, Q.q, refs, w, &blocks);
  CostReport rep;
  rep.cost_history.push_back(cost.total());
  double lambda = s.lambda0;

  // Gauss-Newton blocks for the current linearization
  std::vector<MatX> JtJ(T);
  std::vector<VecX> Jtr(T);
  auto build = [&] {
    for (int i = 0; i < T; ++i) {
      JtJ[i].noalias() = blocks[i].J.transpose() * blocks[i].J;
      Jtr[i].noalias() = blocks[i].J.transpose() * blocks[i].r;
    }
  };
  build();

  for (int it = 0; it < s.max_iterations; ++it) {
    if (cost.total() <= std::numeric_limits<double>::min()) {
      rep.stationary = true;
      break;
    }
    ++rep.iterations;
    BlockTridiagonal<double> sys(T, n);
    for (int i = 0; i < T; ++i) {
      sys.diag[i] = JtJ[i];
      sys.diag[i].diagonal().array() += lambda;
      sys.rhs[i] = -Jtr[i];
    }
    for (int i = 1; i < T; ++i) {
      const VecX d = w.w_smooth * (Q.q.row(i) - Q.q.row(i - 1)).transpose();
      sys.diag[i].diagonal().array() += w.w_smooth;
      sys.diag[i - 1].diagonal().array() += w.w_smooth;
      sys.lower[i] = -w.w_smooth * MatX::Identity(n, n);
      sys.rhs[i] -= d;
      sys.rhs[i - 1] += d;
    }
    const auto dq = sys.solve();

    // decrease predicted by the undamped linear model
    double model_cost = 0.0;
    for (int i = 0; i < T; ++i) model_cost += (blocks[i].r + blocks[i].J * dq[i]).squaredNorm();
    for (int i = 1; i < T; ++i)
      model_cost += w.w_smooth * ((Q.q.row(i) - Q.q.row(i - 1)).transpose() + dq[i] - dq[i - 1]).squaredNorm();
    const double predicted = cost.total() - model_cost;
    if (predicted <= s.relative_tolerance * cost.total()) {
      rep.stationary = true;
      break;
    }

    MatX trial = Q.q;
    for (int i = 0; i < T; ++i) trial.row(i) += dq[i].transpose();
    trial = detail::clamp_rows(m, trial);
    const detail::TrajectoryCost tc = detail::evaluate(m, trial, refs, w, nullptr);
    if (tc.total() < cost.total()) {
      const double rel = (cost.total() - tc.total()) / cost.total();
      Q.q = trial;
      cost = detail::evaluate(m, Q.q, refs, w, &blocks);
      build();
      rep.cost_history.push_back(cost.total());
      lambda = std::max(lambda * 0.5, 1e-12);
      if (rel < s.relative_tolerance) {
        rep.stationary = true;
        break;
      }
    } else {
      lambda *= 10.0;
      if (lambda > 1e12) {
        rep.stationary = true;
        break;
      }
    }
  }
  rep.tracking = cost.tracking;
  rep.collision = cost.collision;
  rep.smoothness = cost.smoothness;
  rep.limit = cost.limit;
  return {std::move(Q), std::move(rep)};
}

inline void finalize_report(const RobotModel& m, const ReferenceTargets& refs, const SolverSettings& s,
                            SolveResult& out) {
  const TrackingErrors e = tracking_errors(m, out.Q, refs);
  out.report.wrist_pos_rmse = e.wrist_pos_rmse;
  out.report.wrist_ori_rmse = e.wrist_ori_rmse;
  out.report.elbow_pos_rmse = e.elbow_pos_rmse;
  out.report.max_violation = detail::max_violation(m, out.Q.q);
  out.report.converged = out.report.stationary && e.wrist_pos_rmse <= s.wrist_pos_tolerance &&
                         e.wrist_ori_rmse <= s.wrist_ori_tolerance;
}

/// Two-phase solve. A seed pose runs the prioritized IK seed first; a warm-start trajectory skips it.
inline SolveResult solve_joint_trajectory(const RobotModel& m, const ReferenceTargets& refs, const CostWeights& w,
                                          const SolverSettings& s, const SolveInit& init) {
  validate(w);
  if (refs.size() < 2) throw DimensionError("solve: references need at least 2 steps");
  JointTrajectory Q;
  if (const auto* seed = std::get_if<VecX>(&init)) {
    check_dof(m, *seed);
    Q = prioritized_ik_trajectory(m, refs, *seed, w, s);
  } else {
    Q = std::get<JointTrajectory>(init);
    if (Q.q.rows() != refs.size() || Q.q.cols() != m.dof())
      throw DimensionError("solve: warm-start trajectory does not match the references");
  }
  if (static_cast<int>(refs.timestamps.size()) == refs.size()) {
    Q.timestamps = refs.timestamps;
  } else if (static_cast<int>(Q.timestamps.size()) != refs.size()) {
    Q.timestamps.resize(refs.size());
    for (int i = 0; i < refs.size(); ++i) Q.timestamps[i] = i;
  }

  SolveResult out;
  if (s.refine) {
    out = refine_trajectory(m, refs, w, s, std::move(Q));
  } else {
    out.Q = std::move(Q);
    const auto c = detail::evaluate(m, out.Q.q, refs, w, nullptr);
    out.report.tracking = c.tracking;
    out.report.collision = c.collision;
    out.report.smoothness = c.smoothness;
    out.report.limit = c.limit;
    out.report.stationary = true;
    out.report.cost_history.push_back(c.total());
  }
  finalize_report(m, refs, s, out);
  return out;
}

// ---------------------------------------------------------------- feasibility

struct Violation {
  int segment = 0;
  std::string type;  // "collision" or "limit"
  /// Deepest penetration (m) or largest limit excess (rad) found in the segment.
  double amount = 0.0;
};

struct FeasibilityReport {
  bool feasible = true;
  std::vector<Violation> violations;
  int substeps = 0;
};

/// Interpolates adjacent rows so no joint moves more than max_step per sub-step and checks
/// strict clearance and joint limits at every sub-step. Segment i spans rows i and i+1.
inline FeasibilityReport dense_feasibility(const RobotModel& m, const JointTrajectory& Q, double max_step) {
  if (!(max_step > 0.0)) throw InvariantError("dense feasibility: max_step must be > 0");
  if (Q.q.cols() != m.dof()) throw DimensionError("dense feasibility: trajectory width does not match the model");
  FeasibilityReport rep;
  const VecX lo = m.lower_limits(), hi = m.upper_limits();
  const int rows = static_cast<int>(Q.q.rows());
  const int segments = std::max(1, rows - 1);
  for (int seg = 0; seg < segments; ++seg) {
    const VecX a = Q.q.row(seg).transpose();
    const VecX b = rows > 1 ? VecX(Q.q.row(seg + 1).transpose()) : a;
    const int k = std::max(1, static_cast<int>(std::ceil((b - a).cwiseAbs().maxCoeff() / max_step)));
    const int last = seg + 1 == segments ? k : k - 1;
    double limit_excess = 0.0, penetration = -1.0;
    for (int j = 0; j <= last; ++j) {
      const VecX q = a + (b - a) * (static_cast<double>(j) / k);
      ++rep.substeps;
      limit_excess = std::max({limit_excess, (q - hi).maxCoeff(), (lo - q).maxCoeff()});
      const double c = min_clearance(m, q).distance;
      if (c <= 0.0) penetration = std::max(penetration, -c);
    }
    if (limit_excess > 0.0) rep.violations.push_back({seg, "limit", limit_excess});
    if (penetration >= 0.0) rep.violations.push_back({seg, "collision", penetration});
  }
  rep.feasible = rep.violations.empty();
  return rep;
}

}  // namespace dualarm
