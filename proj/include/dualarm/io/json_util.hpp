#pragma once

#include "dualarm/core/error.hpp"
#include "dualarm/core/types.hpp"

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace dualarm::io {

using json = nlohmann::json;

/// Parses text, converting syntax errors into ParseError("line L, column C").
inline json parse_text(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < std::min<std::size_t>(e.byte ? e.byte - 1 : 0, text.size()); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ParseError("line " + std::to_string(line) + ", column " + std::to_string(col), "malformed document");
  }
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path.string(), "cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Writes to a sibling temp file, then renames over the target.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  const auto parent = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
  if (!parent.empty()) std::filesystem::create_directories(parent);
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << content;
    if (!out) throw Error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

/// Field accessors that report the JSON path on failure.
class Reader {
 public:
  Reader(const json& node, std::string path) : node_(node), path_(std::move(path)) {}

  const json& node() const { return node_; }
  const std::string& path() const { return path_; }

  bool has(const std::string& key) const { return node_.is_object() && node_.contains(key); }

  Reader at(const std::string& key) const {
    if (!node_.is_object()) fail("expected an object");
    if (!node_.contains(key)) throw ParseError(child(key), "missing field");
    return {node_.at(key), child(key)};
  }

  Reader at(std::size_t i) const {
    if (!node_.is_array() || i >= node_.size()) fail("index out of range");
    return {node_.at(i), path_ + "[" + std::to_string(i) + "]"};
  }

  std::size_t size() const {
    if (!node_.is_array()) fail("expected an array");
    return node_.size();
  }

  double number() const {
    if (!node_.is_number()) fail("expected a number");
    return node_.get<double>();
  }
  int integer() const {
    if (!node_.is_number_integer()) fail("expected an integer");
    return node_.get<int>();
  }
  bool boolean() const {
    if (!node_.is_boolean()) fail("expected a boolean");
    return node_.get<bool>();
  }
  std::string string() const {
    if (!node_.is_string()) fail("expected a string");
    return node_.get<std::string>();
  }

  double number(const std::string& key, double fallback) const { return has(key) ? at(key).number() : fallback; }
  int integer(const std::string& key, int fallback) const { return has(key) ? at(key).integer() : fallback; }
  bool boolean(const std::string& key, bool fallback) const { return has(key) ? at(key).boolean() : fallback; }
  std::string string(const std::string& key, const std::string& fallback) const {
    return has(key) ? at(key).string() : fallback;
  }

  std::vector<double> numbers() const {
    std::vector<double> out(size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = at(i).number();
    return out;
  }

  Vec3 vec3() const {
    if (size() != 3) fail("expected 3 numbers");
    return {at(0).number(), at(1).number(), at(2).number()};
  }

  /// Quaternion as [w, x, y, z]; rejects near-zero norm. Values already unit to 1e-12 are kept
  /// bit-exact so written documents read back unchanged.
  Quat quat() const {
    if (size() != 4) fail("expected 4 numbers [w, x, y, z]");
    Quat q(at(0).number(), at(1).number(), at(2).number(), at(3).number());
    if (!(q.norm() > 1e-9)) fail("quaternion has zero norm");
    return std::abs(q.norm() - 1.0) <= 1e-12 ? q : q.normalized();
  }

  [[noreturn]] void fail(const std::string& what) const { throw ParseError(path_, what); }

 private:
  std::string child(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json& node_;
  std::string path_;
};

inline json to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }
inline json to_json(const Quat& q) { return json::array({q.w(), q.x(), q.y(), q.z()}); }

inline json pose_to_json(const Pose& p) {
  return {{"position", to_json(p.position)}, {"orientation", to_json(p.orientation)}};
}

inline Pose read_pose(const Reader& r) {
  Pose p;
  if (r.has("position")) p.position = r.at("position").vec3();
  if (r.has("orientation")) p.orientation = r.at("orientation").quat();
  return p;
}

/// Stable text form: two-space indent, trailing newline.
inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace dualarm::io
