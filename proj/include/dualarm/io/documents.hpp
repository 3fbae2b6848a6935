#pragma once

#include "dualarm/io/json_util.hpp"
#include "dualarm/metrics/metrics.hpp"

#include <set>
#include <string>
#include <vector>

namespace dualarm::io {

inline constexpr const char* kDemoFormat = "dualarm/demonstration";
inline constexpr const char* kModelFormat = "dualarm/model";
inline constexpr const char* kResultFormat = "dualarm/result";
inline constexpr const char* kReportFormat = "dualarm/report";

namespace detail {

inline void expect_format(const Reader& r, const char* format) {
  if (!r.has("format")) return;
  const std::string f = r.at("format").string();
  if (f != format) r.at("format").fail("expected '" + std::string(format) + "', got '" + f + "'");
}

/// Rejects keys outside `allowed`; typos in hand-written configs should not pass silently.
inline void only_keys(const Reader& r, std::initializer_list<const char*> allowed) {
  if (!r.node().is_object()) r.fail("expected an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : r.node().items())
    if (!ok.count(key)) throw ParseError(r.path().empty() ? key : r.path() + "." + key, "unknown field");
}

inline json vec3s(const std::vector<Vec3>& v) {
  json out = json::array();
  for (const auto& p : v) out.push_back(to_json(p));
  return out;
}

inline json quats(const std::vector<Quat>& v) {
  json out = json::array();
  for (const auto& q : v) out.push_back(to_json(q));
  return out;
}

inline std::vector<Vec3> read_vec3s(const Reader& r) {
  std::vector<Vec3> out(r.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = r.at(i).vec3();
  return out;
}

inline std::vector<Quat> read_quats(const Reader& r) {
  std::vector<Quat> out(r.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = r.at(i).quat();
  return out;
}

inline json matrix(const MatX& m) {
  json out = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    out.push_back(std::move(row));
  }
  return out;
}

inline MatX read_matrix(const Reader& r, int cols = -1) {
  const auto rows = static_cast<Eigen::Index>(r.size());
  if (rows == 0) return MatX(0, std::max(cols, 0));
  const auto c = static_cast<Eigen::Index>(r.at(0).size());
  if (cols >= 0 && c != cols) r.at(0).fail("expected " + std::to_string(cols) + " columns");
  MatX m(rows, c);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const Reader row = r.at(static_cast<std::size_t>(i));
    if (static_cast<Eigen::Index>(row.size()) != c) row.fail("ragged matrix row");
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = row.at(static_cast<std::size_t>(j)).number();
  }
  return m;
}

inline json positions(const PositionTrajectory& a) { return vec3s(a.samples); }

inline json sg_to_json(const StartGoalSet& sg) {
  json out = json::object();
  for (int c = 0; c < kChannelCount; ++c) out[kChannelNames[c]] = {{"start", to_json(sg.S[c])}, {"goal", to_json(sg.G[c])}};
  return out;
}

inline StartGoalSet read_sg(const Reader& r) {
  StartGoalSet sg;
  for (int c = 0; c < kChannelCount; ++c) {
    const Reader ch = r.at(kChannelNames[c]);
    sg.S[c] = ch.at("start").vec3();
    sg.G[c] = ch.at("goal").vec3();
  }
  validate(sg);
  return sg;
}

inline json fingers_to_json(const std::vector<FingerChannel>& fs) {
  json out = json::array();
  for (const auto& f : fs) out.push_back({{"name", f.name}, {"range", {f.range_min, f.range_max}}, {"q", f.q}});
  return out;
}

inline std::vector<FingerChannel> read_finger_channels(const Reader& r) {
  std::vector<FingerChannel> out;
  for (std::size_t i = 0; i < r.size(); ++i) {
    const Reader fr = r.at(i);
    FingerChannel f;
    f.name = fr.at("name").string();
    const Reader range = fr.at("range");
    if (range.size() != 2) range.fail("expected [min, max]");
    f.range_min = range.at(0).number();
    f.range_max = range.at(1).number();
    f.q = fr.at("q").numbers();
    out.push_back(std::move(f));
  }
  return out;
}

inline json dmp_to_json(const DmpParams& p) {
  json basis = json::array();
  for (int i = 0; i < p.n_basis(); ++i) basis.push_back({{"center", p.centers[i]}, {"width", p.widths[i]}});
  return {{"K", p.K},
          {"D", p.D},
          {"alpha", p.alpha},
          {"tau", p.tau},
          {"basis", basis},
          {"weights", matrix(p.weights)},
          {"y0", to_json(p.y0)},
          {"goal", to_json(p.goal)},
          {"degenerate", {p.degenerate[0], p.degenerate[1], p.degenerate[2]}},
          {"degenerate_scale", to_json(p.degenerate_scale)}};
}

inline DmpParams read_dmp(const Reader& r) {
  DmpParams p;
  p.K = r.at("K").number();
  p.D = r.at("D").number();
  p.alpha = r.at("alpha").number();
  p.tau = r.at("tau").number();
  const Reader basis = r.at("basis");
  for (std::size_t i = 0; i < basis.size(); ++i) {
    p.centers.push_back(basis.at(i).at("center").number());
    p.widths.push_back(basis.at(i).at("width").number());
  }
  p.weights = read_matrix(r.at("weights"), 3);
  if (p.weights.rows() != p.n_basis()) r.at("weights").fail("expected one row per basis function");
  p.y0 = r.at("y0").vec3();
  p.goal = r.at("goal").vec3();
  if (r.has("degenerate")) {
    const Reader d = r.at("degenerate");
    if (d.size() != 3) d.fail("expected 3 booleans");
    for (int k = 0; k < 3; ++k) p.degenerate[k] = d.at(k).boolean();
  }
  if (r.has("degenerate_scale")) p.degenerate_scale = r.at("degenerate_scale").vec3();
  try {
    validate(p);
  } catch (const InvariantError& e) {
    r.fail(e.what());
  }
  return p;
}

inline json feasibility_to_json(const FeasibilityReport& f) {
  json v = json::array();
  for (const auto& x : f.violations) v.push_back({{"segment", x.segment}, {"type", x.type}, {"amount", x.amount}});
  return {{"feasible", f.feasible}, {"substeps", f.substeps}, {"violations", v}};
}

inline FeasibilityReport read_feasibility(const Reader& r) {
  FeasibilityReport f;
  f.feasible = r.at("feasible").boolean();
  f.substeps = r.integer("substeps", 0);
  const Reader v = r.at("violations");
  for (std::size_t i = 0; i < v.size(); ++i)
    f.violations.push_back({v.at(i).at("segment").integer(), v.at(i).at("type").string(), v.at(i).at("amount").number()});
  return f;
}

inline json cost_to_json(const CostReport& c) {
  return {{"tracking", c.tracking},
          {"collision", c.collision},
          {"smoothness", c.smoothness},
          {"limit", c.limit},
          {"iterations", c.iterations},
          {"converged", c.converged},
          {"stationary", c.stationary},
          {"max_violation", c.max_violation},
          {"wrist_pos_rmse", c.wrist_pos_rmse},
          {"wrist_ori_rmse", c.wrist_ori_rmse},
          {"elbow_pos_rmse", c.elbow_pos_rmse},
          {"cost_history", c.cost_history}};
}

inline CostReport read_cost(const Reader& r) {
  CostReport c;
  c.tracking = r.at("tracking").number();
  c.collision = r.at("collision").number();
  c.smoothness = r.at("smoothness").number();
  c.limit = r.at("limit").number();
  c.iterations = r.at("iterations").integer();
  c.converged = r.at("converged").boolean();
  c.stationary = r.boolean("stationary", false);
  c.max_violation = r.number("max_violation", 0.0);
  c.wrist_pos_rmse = r.at("wrist_pos_rmse").number();
  c.wrist_ori_rmse = r.at("wrist_ori_rmse").number();
  c.elbow_pos_rmse = r.number("elbow_pos_rmse", 0.0);
  if (r.has("cost_history")) c.cost_history = r.at("cost_history").numbers();
  return c;
}

inline json references_to_json(const ReferenceSet& r) {
  return {{"LW", positions(r.LW)}, {"RW", positions(r.RW)}, {"LE", positions(r.LE)}, {"RE", positions(r.RE)},
          {"R_LW", quats(r.R_LW)}, {"R_RW", quats(r.R_RW)}};
}

inline ReferenceSet read_references(const Reader& r, const std::vector<double>& timestamps) {
  ReferenceSet out;
  auto traj = [&](const char* key) {
    PositionTrajectory t{read_vec3s(r.at(key)), timestamps};
    if (t.samples.size() != timestamps.size()) r.at(key).fail("sample count does not match timestamps");
    return t;
  };
  out.LW = traj("LW");
  out.RW = traj("RW");
  out.LE = traj("LE");
  out.RE = traj("RE");
  out.R_LW = read_quats(r.at("R_LW"));
  out.R_RW = read_quats(r.at("R_RW"));
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------- demonstration

inline json demo_to_json(const Demonstration& d) {
  return {{"format", kDemoFormat},
          {"name", d.name},
          {"hand_length", d.hand_length},
          {"shoulders", {{"left", to_json(d.shoulder_left)}, {"right", to_json(d.shoulder_right)}}},
          {"timestamps", d.timestamps},
          {"positions",
           {{"LW", detail::positions(d.LW)},
            {"RW", detail::positions(d.RW)},
            {"LE", detail::positions(d.LE)},
            {"RE", detail::positions(d.RE)}}},
          {"orientations", {{"LW", detail::quats(d.R_LW)}, {"RW", detail::quats(d.R_RW)}}},
          {"fingers", {{"left", detail::fingers_to_json(d.left_fingers)}, {"right", detail::fingers_to_json(d.right_fingers)}}}};
}

inline Demonstration demo_from_json(const json& doc) {
  const Reader r(doc, "");
  detail::expect_format(r, kDemoFormat);
  Demonstration d;
  d.name = r.string("name", "demo");
  d.hand_length = r.at("hand_length").number();
  d.shoulder_left = r.at("shoulders").at("left").vec3();
  d.shoulder_right = r.at("shoulders").at("right").vec3();
  d.timestamps = r.at("timestamps").numbers();
  const Reader p = r.at("positions");
  d.LW = {detail::read_vec3s(p.at("LW")), d.timestamps};
  d.RW = {detail::read_vec3s(p.at("RW")), d.timestamps};
  d.LE = {detail::read_vec3s(p.at("LE")), d.timestamps};
  d.RE = {detail::read_vec3s(p.at("RE")), d.timestamps};
  d.R_LW = detail::read_quats(r.at("orientations").at("LW"));
  d.R_RW = detail::read_quats(r.at("orientations").at("RW"));
  if (r.has("fingers")) {
    const Reader f = r.at("fingers");
    if (f.has("left")) d.left_fingers = detail::read_finger_channels(f.at("left"));
    if (f.has("right")) d.right_fingers = detail::read_finger_channels(f.at("right"));
  }
  validate(d);
  return d;
}

inline Demonstration load_demo_file(const std::filesystem::path& path) { return demo_from_json(parse_text(read_file(path))); }

// ---------------------------------------------------------------- config

inline json config_to_json(const RetargetConfig& c) {
  const CostWeights& w = c.weights;
  const SolverSettings& s = c.solver;
  json out = {{"max_rounds", c.max_rounds},
              {"steps", c.steps},
              {"max_step", c.max_step},
              {"weights",
               {{"w_wrist_pos", w.w_wrist_pos},
                {"w_wrist_ori", w.w_wrist_ori},
                {"w_elbow_pos", w.w_elbow_pos},
                {"w_col", w.w_col},
                {"w_smooth", w.w_smooth},
                {"w_limit", w.w_limit},
                {"d_safe", w.d_safe}}},
              {"solver",
               {{"max_iterations", s.max_iterations},
                {"lambda0", s.lambda0},
                {"relative_tolerance", s.relative_tolerance},
                {"ik_iterations_first", s.ik_iterations_first},
                {"ik_iterations", s.ik_iterations},
                {"ik_damping", s.ik_damping},
                {"ik_max_step", s.ik_max_step},
                {"ik_max_position_error", s.ik_max_position_error},
                {"ik_max_rotation_error", s.ik_max_rotation_error},
                {"refine", s.refine},
                {"wrist_pos_tolerance", s.wrist_pos_tolerance},
                {"wrist_ori_tolerance", s.wrist_ori_tolerance}}},
              {"startgoal",
               {{"w_scl", c.startgoal.w_scl},
                {"w_ori", c.startgoal.w_ori},
                {"w_rel", c.startgoal.w_rel},
                {"relative_sum", c.startgoal.relative_sum}}},
              {"dmp", {{"K", c.gains.K}, {"alpha", c.gains.alpha}, {"n_basis", c.gains.n_basis}, {"D", c.gains.D}}}};
  if (c.seed_pose.size() > 0) out["seed_pose"] = std::vector<double>(c.seed_pose.data(), c.seed_pose.data() + c.seed_pose.size());
  return out;
}

/// Every field is optional; absent fields keep their defaults.
inline RetargetConfig config_from_json(const json& doc) {
  const Reader r(doc, "");
  detail::only_keys(r, {"format", "max_rounds", "steps", "max_step", "seed_pose", "weights", "solver", "startgoal", "dmp"});
  RetargetConfig c;
  c.max_rounds = r.integer("max_rounds", c.max_rounds);
  c.steps = r.integer("steps", c.steps);
  c.max_step = r.number("max_step", c.max_step);
  if (r.has("seed_pose")) {
    const auto v = r.at("seed_pose").numbers();
    c.seed_pose = Eigen::Map<const VecX>(v.data(), static_cast<Eigen::Index>(v.size()));
  }
  if (r.has("weights")) {
    const Reader w = r.at("weights");
    detail::only_keys(w, {"w_wrist_pos", "w_wrist_ori", "w_elbow_pos", "w_col", "w_smooth", "w_limit", "d_safe"});
    CostWeights& cw = c.weights;
    cw.w_wrist_pos = w.number("w_wrist_pos", cw.w_wrist_pos);
    cw.w_wrist_ori = w.number("w_wrist_ori", cw.w_wrist_ori);
    cw.w_elbow_pos = w.number("w_elbow_pos", cw.w_elbow_pos);
    cw.w_col = w.number("w_col", cw.w_col);
    cw.w_smooth = w.number("w_smooth", cw.w_smooth);
    cw.w_limit = w.number("w_limit", cw.w_limit);
    cw.d_safe = w.number("d_safe", cw.d_safe);
  }
  if (r.has("solver")) {
    const Reader s = r.at("solver");
    detail::only_keys(s, {"max_iterations", "lambda0", "relative_tolerance", "ik_iterations_first", "ik_iterations",
                          "ik_damping", "ik_max_step", "ik_max_position_error", "ik_max_rotation_error", "refine",
                          "wrist_pos_tolerance", "wrist_ori_tolerance"});
    SolverSettings& ss = c.solver;
    ss.max_iterations = s.integer("max_iterations", ss.max_iterations);
    ss.lambda0 = s.number("lambda0", ss.lambda0);
    ss.relative_tolerance = s.number("relative_tolerance", ss.relative_tolerance);
    ss.ik_iterations_first = s.integer("ik_iterations_first", ss.ik_iterations_first);
    ss.ik_iterations = s.integer("ik_iterations", ss.ik_iterations);
    ss.ik_damping = s.number("ik_damping", ss.ik_damping);
    ss.ik_max_step = s.number("ik_max_step", ss.ik_max_step);
    ss.ik_max_position_error = s.number("ik_max_position_error", ss.ik_max_position_error);
    ss.ik_max_rotation_error = s.number("ik_max_rotation_error", ss.ik_max_rotation_error);
    ss.refine = s.boolean("refine", ss.refine);
    ss.wrist_pos_tolerance = s.number("wrist_pos_tolerance", ss.wrist_pos_tolerance);
    ss.wrist_ori_tolerance = s.number("wrist_ori_tolerance", ss.wrist_ori_tolerance);
  }
  if (r.has("startgoal")) {
    const Reader s = r.at("startgoal");
    detail::only_keys(s, {"w_scl", "w_ori", "w_rel", "relative_sum"});
    c.startgoal.w_scl = s.number("w_scl", c.startgoal.w_scl);
    c.startgoal.w_ori = s.number("w_ori", c.startgoal.w_ori);
    c.startgoal.w_rel = s.number("w_rel", c.startgoal.w_rel);
    c.startgoal.relative_sum = s.boolean("relative_sum", c.startgoal.relative_sum);
  }
  if (r.has("dmp")) {
    const Reader g = r.at("dmp");
    detail::only_keys(g, {"K", "alpha", "n_basis", "D"});
    c.gains.K = g.number("K", c.gains.K);
    c.gains.alpha = g.number("alpha", c.gains.alpha);
    c.gains.n_basis = g.integer("n_basis", c.gains.n_basis);
    c.gains.D = g.number("D", c.gains.D);
  }
  validate(c);
  return c;
}

inline RetargetConfig load_config_file(const std::filesystem::path& path) {
  return config_from_json(parse_text(read_file(path)));
}

// ---------------------------------------------------------------- coordination model

inline json model_to_json(const CoordinationModel& m) {
  json channels = json::object();
  for (int c = 0; c < kChannelCount; ++c) channels[kChannelNames[c]] = detail::dmp_to_json(m.dmp[c]);
  return {{"format", kModelFormat},
          {"timestamps", m.timestamps},
          {"channels", channels},
          {"original", detail::sg_to_json(m.original)},
          {"orientations", {{"LW", detail::quats(m.R_LW)}, {"RW", detail::quats(m.R_RW)}}}};
}

inline CoordinationModel model_from_json(const json& doc) {
  const Reader r(doc, "");
  detail::expect_format(r, kModelFormat);
  CoordinationModel m;
  m.timestamps = r.at("timestamps").numbers();
  if (m.timestamps.size() < 3) r.at("timestamps").fail("needs at least 3 samples");
  for (int c = 0; c < kChannelCount; ++c) m.dmp[c] = detail::read_dmp(r.at("channels").at(kChannelNames[c]));
  m.original = detail::read_sg(r.at("original"));
  m.R_LW = detail::read_quats(r.at("orientations").at("LW"));
  m.R_RW = detail::read_quats(r.at("orientations").at("RW"));
  if (m.R_LW.size() != m.timestamps.size() || m.R_RW.size() != m.timestamps.size())
    r.at("orientations").fail("orientation count does not match timestamps");
  return m;
}

inline CoordinationModel load_model_file(const std::filesystem::path& path) {
  return model_from_json(parse_text(read_file(path)));
}

// ---------------------------------------------------------------- retarget result

inline json result_to_json(const RetargetResult& r) {
  json fingers = json::array();
  for (const auto& f : r.fingers) fingers.push_back({{"name", f.name}, {"q", f.q}});
  json rounds = json::array();
  for (const auto& rr : r.rounds)
    rounds.push_back({{"round", rr.round},
                      {"startgoal", detail::sg_to_json(rr.sg)},
                      {"cost", detail::cost_to_json(rr.cost)},
                      {"feasibility", detail::feasibility_to_json(rr.feasibility)}});
  return {{"format", kResultFormat},
          {"method", r.method},
          {"feasible", r.feasible},
          {"selected_round", r.selected_round},
          {"timestamps", r.Q.timestamps},
          {"q", detail::matrix(r.Q.q)},
          {"fingers", fingers},
          {"startgoal", detail::sg_to_json(r.sg)},
          {"rounds", rounds},
          {"feasibility", detail::feasibility_to_json(r.feasibility)},
          {"references", detail::references_to_json(r.references)}};
}

inline RetargetResult result_from_json(const json& doc) {
  const Reader r(doc, "");
  detail::expect_format(r, kResultFormat);
  RetargetResult out;
  out.method = r.at("method").string();
  out.feasible = r.at("feasible").boolean();
  out.selected_round = r.integer("selected_round", 0);
  out.Q.timestamps = r.at("timestamps").numbers();
  out.Q.q = detail::read_matrix(r.at("q"));
  if (static_cast<std::size_t>(out.Q.q.rows()) != out.Q.timestamps.size())
    r.at("q").fail("row count does not match timestamps");
  if (r.has("fingers")) {
    const Reader f = r.at("fingers");
    for (std::size_t i = 0; i < f.size(); ++i) out.fingers.push_back({f.at(i).at("name").string(), f.at(i).at("q").numbers()});
  }
  out.sg = detail::read_sg(r.at("startgoal"));
  const Reader rounds = r.at("rounds");
  for (std::size_t i = 0; i < rounds.size(); ++i) {
    const Reader rr = rounds.at(i);
    out.rounds.push_back({rr.at("round").integer(), detail::read_sg(rr.at("startgoal")), detail::read_cost(rr.at("cost")),
                          detail::read_feasibility(rr.at("feasibility"))});
  }
  out.feasibility = detail::read_feasibility(r.at("feasibility"));
  if (r.has("references")) out.references = detail::read_references(r.at("references"), out.Q.timestamps);
  return out;
}

inline RetargetResult load_result_file(const std::filesystem::path& path) {
  return result_from_json(parse_text(read_file(path)));
}

// ---------------------------------------------------------------- similarity report

inline json report_to_json(const SimilarityReport& rep) {
  json frechet = json::object();
  for (std::size_t c = 0; c < kReportColumns.size(); ++c) frechet[kReportColumns[c]] = rep.frechet[c];
  return {{"format", kReportFormat},
          {"motion", rep.motion},
          {"method", rep.method},
          {"feasible", rep.feasible},
          {"contact_error", rep.contact_error},
          {"frechet", frechet}};
}

inline SimilarityReport report_from_json(const json& doc) {
  const Reader r(doc, "");
  detail::expect_format(r, kReportFormat);
  SimilarityReport rep;
  rep.motion = r.at("motion").string();
  rep.method = r.at("method").string();
  rep.feasible = r.at("feasible").boolean();
  rep.contact_error = r.number("contact_error", 0.0);
  for (std::size_t c = 0; c < kReportColumns.size(); ++c) {
    rep.frechet[c] = r.at("frechet").at(kReportColumns[c]).number();
    if (!(rep.frechet[c] >= 0.0)) r.at("frechet").at(kReportColumns[c]).fail("distance must be >= 0");
  }
  return rep;
}

/// Fixed-width text table with the nine distance columns, one row per report.
inline std::string report_table(const std::vector<SimilarityReport>& reports) {
  std::string out;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%-18s %-12s", "motion", "method");
  out += buf;
  for (const char* c : kReportColumns) {
    std::snprintf(buf, sizeof buf, " %7s", c);
    out += buf;
  }
  out += "  feasible  contact\n";
  for (const auto& rep : reports) {
    std::snprintf(buf, sizeof buf, "%-18s %-12s", rep.motion.c_str(), rep.method.c_str());
    out += buf;
    for (double v : rep.frechet) {
      std::snprintf(buf, sizeof buf, " %7.3f", v);
      out += buf;
    }
    std::snprintf(buf, sizeof buf, "  %-8s  %7.4f\n", rep.feasible ? "yes" : "no", rep.contact_error);
    out += buf;
  }
  return out;
}

}  // namespace dualarm::io
