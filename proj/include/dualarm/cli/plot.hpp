#pragma once

#include "dualarm/metrics/metrics.hpp"

#include <cstdio>
#include <string>
#include <vector>

namespace dualarm::plot {

/// One plotted channel: three components per sample for demonstration and robot.
struct Series {
  std::string name;
  std::vector<std::string> components;  // e.g. x y z or roll pitch yaw
  std::vector<double> t_demo, t_robot;
  std::vector<Vec3> demo, robot;
};

/// Cumulative path length normalized to [0, 1]; a motionless path falls back to sample index.
inline std::vector<double> path_parameter(const std::vector<Vec3>& p) {
  std::vector<double> s(p.size(), 0.0);
  for (std::size_t i = 1; i < p.size(); ++i) s[i] = s[i - 1] + (p[i] - p[i - 1]).norm();
  const double total = s.empty() ? 0.0 : s.back();
  for (std::size_t i = 0; i < s.size(); ++i)
    s[i] = total > 1e-12 ? s[i] / total : (p.size() > 1 ? static_cast<double>(i) / (p.size() - 1) : 0.0);
  return s;
}

/// Roll-pitch-yaw (x-y-z fixed axes) with each angle unwrapped along the sequence.
inline std::vector<Vec3> unwrapped_rpy(const std::vector<Quat>& q) {
  std::vector<Vec3> out(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    const Mat3 R = q[i].toRotationMatrix();
    const double pitch = std::asin(std::clamp(-R(2, 0), -1.0, 1.0));
    out[i] = Vec3(std::atan2(R(2, 1), R(2, 2)), pitch, std::atan2(R(1, 0), R(0, 0)));
    if (i > 0)
      for (int a = 0; a < 3; ++a) {
        const double d = out[i][a] - out[i - 1][a];
        out[i][a] -= 2.0 * kPi * std::round(d / (2.0 * kPi));
      }
  }
  return out;
}

/// Tab-separated columns: time, then the three components.
inline std::string columns(const std::vector<double>& t, const std::vector<Vec3>& v, const std::vector<std::string>& names) {
  std::string out = "# time";
  for (const auto& n : names) out += "\t" + n;
  out += "\n";
  char buf[128];
  for (std::size_t i = 0; i < v.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.6f\t%.9g\t%.9g\t%.9g\n", t[i], v[i].x(), v[i].y(), v[i].z());
    out += buf;
  }
  return out;
}

/// Three stacked panels (one per component) against path-length-normalized time; the
/// demonstration is dashed, the robot solid.
inline std::string svg(const Series& s) {
  const double W = 640, H = 180, left = 60, right = 20, top = 30, gap = 30;
  const double total_h = top + 3 * H + 2 * gap + 30;
  const auto sd = path_parameter(s.demo), sr = path_parameter(s.robot);
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" font-family=\"sans-serif\" "
                "font-size=\"12\">\n<text x=\"%.0f\" y=\"18\" font-size=\"14\">%s</text>\n",
                W, total_h, left, s.name.c_str());
  out += buf;
  for (int a = 0; a < 3; ++a) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto* v : {&s.demo, &s.robot})
      for (const auto& p : *v) {
        lo = std::min(lo, p[a]);
        hi = std::max(hi, p[a]);
      }
    if (!(hi - lo > 1e-9)) {
      lo -= 0.5;
      hi += 0.5;
    }
    const double y0 = top + a * (H + gap), pw = W - left - right;
    auto X = [&](double u) { return left + u * pw; };
    auto Y = [&](double v) { return y0 + H - (v - lo) / (hi - lo) * H; };
    std::snprintf(buf, sizeof buf,
                  "<rect x=\"%.1f\" y=\"%.1f\" width=\"%.1f\" height=\"%.1f\" fill=\"none\" stroke=\"#888\"/>\n"
                  "<text x=\"8\" y=\"%.1f\">%s</text>\n<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"end\">%.3g</text>\n"
                  "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"end\">%.3g</text>\n",
                  left, y0, pw, H, y0 + H / 2, s.components[a].c_str(), left - 4, y0 + 10, hi, left - 4, y0 + H, lo);
    out += buf;
    auto line = [&](const std::vector<double>& u, const std::vector<Vec3>& v, const char* style) {
      out += "<polyline fill=\"none\" " + std::string(style) + " points=\"";
      for (std::size_t i = 0; i < v.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.2f,%.2f ", X(u[i]), Y(v[i][a]));
        out += buf;
      }
      out += "\"/>\n";
    };
    line(sd, s.demo, "stroke=\"#1f77b4\" stroke-dasharray=\"6,4\" stroke-width=\"1.5\"");
    line(sr, s.robot, "stroke=\"#d62728\" stroke-width=\"1.5\"");
  }
  std::snprintf(buf, sizeof buf,
                "<text x=\"%.0f\" y=\"%.0f\">normalized path length — dashed: demonstration, solid: robot</text>\n</svg>\n",
                left, total_h - 8);
  out += buf;
  return out;
}

/// Absolute, relative and orientation channels of the hand-adjusted demonstration and the robot result.
inline std::vector<Series> build_series(const Demonstration& demo, const RetargetResult& result, const RobotModel& robot) {
  const Demonstration ref = adjust_demo_for_hand_length(demo, robot.hand_length);
  const ReferenceSet got = dualarm::detail::tracked_channels(robot, result.Q);
  const ChannelSet want_rel = decompose_demo(ref);
  const ChannelSet got_rel = decompose(got.LW, got.RW, got.LE, got.RE);
  const std::vector<std::string> xyz{"x", "y", "z"}, rpy{"roll", "pitch", "yaw"};
  std::vector<Series> out;
  auto add = [&](const std::string& name, const std::vector<Vec3>& d, const std::vector<Vec3>& r, const std::vector<std::string>& c) {
    out.push_back({name, c, ref.timestamps, result.Q.timestamps, d, r});
  };
  add("LW", ref.LW.samples, got.LW.samples, xyz);
  add("RW", ref.RW.samples, got.RW.samples, xyz);
  add("LE", ref.LE.samples, got.LE.samples, xyz);
  add("RE", ref.RE.samples, got.RE.samples, xyz);
  for (int c = 1; c < kChannelCount; ++c) add(kChannelNames[c], want_rel[c].samples, got_rel[c].samples, xyz);
  add("LWO", unwrapped_rpy(ref.R_LW), unwrapped_rpy(got.R_LW), rpy);
  add("RWO", unwrapped_rpy(ref.R_RW), unwrapped_rpy(got.R_RW), rpy);
  return out;
}

}  // namespace dualarm::plot
