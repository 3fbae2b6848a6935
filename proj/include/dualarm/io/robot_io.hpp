#pragma once

#include "dualarm/io/json_util.hpp"
#include "dualarm/kinematics/robot_model.hpp"

#include <array>
#include <string>

namespace dualarm::io {

namespace detail {

inline constexpr std::array<const char*, 4> kFrameKeys = {"shoulder", "elbow", "wrist", "hand_tip"};

inline KinematicChain read_chain(const Reader& r) {
  KinematicChain chain;
  const Reader joints = r.at("joints");
  for (std::size_t i = 0; i < joints.size(); ++i) {
    const Reader jr = joints.at(i);
    Joint j;
    j.name = jr.at("name").string();
    if (jr.has("origin")) j.origin = read_pose(jr.at("origin"));
    const Vec3 axis = jr.at("axis").vec3();
    if (!(axis.norm() > 1e-9)) jr.at("axis").fail("axis has zero length");
    j.axis = axis.normalized();
    const Reader lim = jr.at("limits");
    if (lim.size() != 2) lim.fail("expected [limit_min, limit_max]");
    j.limit_min = lim.at(0).number();
    j.limit_max = lim.at(1).number();
    chain.joints.push_back(std::move(j));
  }
  const Reader frames = r.at("frames");
  for (int f = 0; f < 4; ++f) {
    const Reader fr = frames.at(kFrameKeys[f]);
    NamedFrame nf;
    nf.joint = fr.at("joint").integer();
    if (fr.has("offset")) nf.offset = read_pose(fr.at("offset"));
    chain.frames[f] = nf;
  }
  return chain;
}

inline json chain_to_json(const KinematicChain& chain, const Pose& base) {
  json joints = json::array();
  for (const auto& j : chain.joints)
    joints.push_back({{"name", j.name},
                      {"origin", pose_to_json(j.origin)},
                      {"axis", to_json(j.axis)},
                      {"limits", {j.limit_min, j.limit_max}}});
  json frames = json::object();
  for (int f = 0; f < 4; ++f)
    frames[kFrameKeys[f]] = {{"joint", chain.frames[f].joint}, {"offset", pose_to_json(chain.frames[f].offset)}};
  return {{"base", pose_to_json(base)}, {"joints", joints}, {"frames", frames}};
}

inline CapsuleOwner parse_owner(const Reader& r) {
  const std::string s = r.string();
  if (s == "left") return CapsuleOwner::Left;
  if (s == "right") return CapsuleOwner::Right;
  if (s == "body") return CapsuleOwner::Body;
  r.fail("expected 'left', 'right' or 'body'");
}

inline const char* owner_name(CapsuleOwner o) {
  switch (o) {
    case CapsuleOwner::Left: return "left";
    case CapsuleOwner::Right: return "right";
    default: return "body";
  }
}

inline std::vector<FingerJoint> read_fingers(const Reader& r) {
  std::vector<FingerJoint> out;
  for (std::size_t i = 0; i < r.size(); ++i) {
    const Reader fr = r.at(i);
    const Reader lim = fr.at("limits");
    if (lim.size() != 2) lim.fail("expected [min, max]");
    out.push_back({fr.at("name").string(), lim.at(0).number(), lim.at(1).number()});
  }
  return out;
}

}  // namespace detail

inline RobotModel robot_from_json(const json& doc) {
  const Reader r(doc, "");
  RobotModel m;
  m.name = r.string("name", "robot");
  m.hand_length = r.number("hand_length", 0.0);
  const Reader arms = r.at("arms");
  if (arms.has("left")) {
    m.left = detail::read_chain(arms.at("left"));
    if (arms.at("left").has("base")) m.left_base = read_pose(arms.at("left").at("base"));
  }
  if (arms.has("right")) {
    m.right = detail::read_chain(arms.at("right"));
    if (arms.at("right").has("base")) m.right_base = read_pose(arms.at("right").at("base"));
  }
  if (r.has("capsules")) {
    const Reader caps = r.at("capsules");
    for (std::size_t i = 0; i < caps.size(); ++i) {
      const Reader cr = caps.at(i);
      Capsule c;
      c.name = cr.at("name").string();
      c.owner = detail::parse_owner(cr.at("owner"));
      c.link = cr.integer("link", -1);
      c.a = cr.at("a").vec3();
      c.b = cr.at("b").vec3();
      c.radius = cr.at("radius").number();
      m.capsules.push_back(std::move(c));
    }
  }
  if (r.has("collision_pairs")) {
    const Reader pairs = r.at("collision_pairs");
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      const Reader pr = pairs.at(i);
      if (pr.size() != 2) pr.fail("expected a pair of capsule names");
      const auto a = m.capsule_index(pr.at(0).string());
      const auto b = m.capsule_index(pr.at(1).string());
      if (!a) pr.at(0).fail("unknown capsule '" + pr.at(0).string() + "'");
      if (!b) pr.at(1).fail("unknown capsule '" + pr.at(1).string() + "'");
      m.collision_pairs.emplace_back(*a, *b);
    }
  }
  if (r.has("fingers")) {
    const Reader fr = r.at("fingers");
    if (fr.has("left")) m.left_fingers = detail::read_fingers(fr.at("left"));
    if (fr.has("right")) m.right_fingers = detail::read_fingers(fr.at("right"));
  }
  validate(m);
  return m;
}

/// Parses and validates a robot description document.
inline RobotModel load_robot(const std::string& text) { return robot_from_json(parse_text(text)); }

inline RobotModel load_robot_file(const std::filesystem::path& path) { return load_robot(read_file(path)); }

inline json robot_to_json(const RobotModel& m) {
  json arms = json::object();
  if (!m.left.empty()) arms["left"] = detail::chain_to_json(m.left, m.left_base);
  if (!m.right.empty()) arms["right"] = detail::chain_to_json(m.right, m.right_base);
  json caps = json::array();
  for (const auto& c : m.capsules)
    caps.push_back({{"name", c.name},
                    {"owner", detail::owner_name(c.owner)},
                    {"link", c.link},
                    {"a", to_json(c.a)},
                    {"b", to_json(c.b)},
                    {"radius", c.radius}});
  json pairs = json::array();
  for (const auto& [a, b] : m.collision_pairs) pairs.push_back({m.capsules[a].name, m.capsules[b].name});
  auto fingers = [](const std::vector<FingerJoint>& fs) {
    json out = json::array();
    for (const auto& f : fs) out.push_back({{"name", f.name}, {"limits", {f.limit_min, f.limit_max}}});
    return out;
  };
  return {{"name", m.name},
          {"hand_length", m.hand_length},
          {"arms", arms},
          {"capsules", caps},
          {"collision_pairs", pairs},
          {"fingers", {{"left", fingers(m.left_fingers)}, {"right", fingers(m.right_fingers)}}}};
}

}  // namespace dualarm::io
