#pragma once

#include "dualarm/cli/plot.hpp"
#include "dualarm/io/documents.hpp"
#include "dualarm/io/robot_io.hpp"
#include "dualarm/synth/synth.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <iostream>
#include <optional>
#include <thread>

namespace dualarm::cli {

enum ExitCode : int { kOk = 0, kFailure = 1, kUsage = 64, kBadInput = 65, kInfeasible = 70 };

inline constexpr const char* kComparisonFormat = "dualarm/comparison";

/// Raised inside a command to leave with a specific exit code.
class CommandError : public Error {
 public:
  CommandError(int code, std::string kind, const std::string& what) : Error(what), code_(code), kind_(std::move(kind)) {}
  int code() const { return code_; }
  const std::string& kind() const { return kind_; }

 private:
  int code_;
  std::string kind_;
};

struct Globals {
  std::uint64_t seed = 0;
  std::string config;
  bool require_feasible = false;
};

namespace detail {

inline void error_json(std::ostream& err, int code, const std::string& kind, const std::string& message,
                       const std::string& locus = {}) {
  io::json e = {{"code", code}, {"kind", kind}, {"message", message}};
  if (!locus.empty()) e["locus"] = locus;
  err << io::json{{"error", e}}.dump() << "\n";
}

inline RetargetConfig load_config(const Globals& g) {
  RetargetConfig c = g.config.empty() ? RetargetConfig{} : io::load_config_file(g.config);
  c.seed = g.seed;
  return c;
}

inline void write(const std::string& path, const io::json& doc) { io::write_file_atomic(path, io::dump(doc)); }

inline io::json summary(const RetargetResult& r, const std::string& out) {
  return {{"method", r.method},
          {"feasible", r.feasible},
          {"rounds", r.rounds.size()},
          {"selected_round", r.selected_round},
          {"violations", r.feasibility.violations.size()},
          {"out", out}};
}

inline void check_feasible(const Globals& g, bool feasible, const std::string& what) {
  if (g.require_feasible && !feasible) throw CommandError(kInfeasible, "infeasible", what + " is not feasible");
}

inline std::vector<std::filesystem::path> motion_files(const std::string& dir) {
  if (!std::filesystem::is_directory(dir)) throw ParseError(dir, "not a directory");
  std::vector<std::filesystem::path> out;
  for (const auto& e : std::filesystem::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".json") out.push_back(e.path());
  std::sort(out.begin(), out.end());
  if (out.empty()) throw ParseError(dir, "no .json demonstrations found");
  return out;
}

inline const std::vector<std::string>& method_names() {
  static const std::vector<std::string> m{"ours", "pure-ik", "pos-scaling"};
  return m;
}

inline RetargetResult run_method(const std::string& method, const Demonstration& d, const RobotModel& robot,
                                 const RetargetConfig& c) {
  if (method == "ours") return retarget_pipeline(d, robot, c);
  if (method == "pure-ik") return baseline_pure_ik(d, robot, c);
  return baseline_position_scaling(d, robot, std::nullopt, c);
}

/// Feasible count and success rate per method.
inline std::string success_table(const std::vector<SimilarityReport>& reports) {
  std::string out = "method        feasible   success\n";
  char buf[96];
  for (const auto& m : method_names()) {
    int n = 0, ok = 0;
    for (const auto& r : reports)
      if (r.method == m) {
        ++n;
        ok += r.feasible ? 1 : 0;
      }
    std::snprintf(buf, sizeof buf, "%-12s  %3d/%-3d    %5.1f%%\n", m.c_str(), ok, n, n ? 100.0 * ok / n : 0.0);
    out += buf;
  }
  return out;
}

}  // namespace detail

/// Evaluates every method on every demonstration. Work items run on `jobs` threads; results are
/// stored by index so the output does not depend on scheduling.
inline std::vector<SimilarityReport> compare_methods(const std::vector<Demonstration>& demos, const RobotModel& robot,
                                                     const RetargetConfig& config, int jobs) {
  const auto& methods = detail::method_names();
  const std::size_t total = demos.size() * methods.size();
  std::vector<SimilarityReport> reports(total);
  std::vector<std::exception_ptr> errors(total);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < total; k = next++) {
      try {
        const Demonstration& d = demos[k / methods.size()];
        const RetargetResult r = detail::run_method(methods[k % methods.size()], d, robot, config);
        reports[k] = evaluate_result(d, r, robot, config.max_step);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  const int n = std::max(1, std::min<int>(jobs, static_cast<int>(total)));
  std::vector<std::thread> pool;
  for (int i = 1; i < n; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return reports;
}

inline io::json comparison_to_json(const std::vector<SimilarityReport>& reports, const RobotModel& robot,
                                   const RetargetConfig& config) {
  io::json rows = io::json::array();
  for (const auto& r : reports) rows.push_back(io::report_to_json(r));
  io::json rates = io::json::object();
  for (const auto& m : detail::method_names()) {
    int n = 0, ok = 0;
    for (const auto& r : reports)
      if (r.method == m) {
        ++n;
        ok += r.feasible ? 1 : 0;
      }
    rates[m] = {{"feasible", ok}, {"total", n}, {"rate", n ? static_cast<double>(ok) / n : 0.0}};
  }
  return {{"format", kComparisonFormat},
          {"seed", config.seed},
          {"robot", robot.name},
          {"config", io::config_to_json(config)},
          {"reports", rows},
          {"success", rates}};
}

/// Parses argv (argv[0] is the program name) and runs one subcommand.
inline int run_command(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Dual-arm motion retargeting"};
  app.require_subcommand(1, 1);
  app.fallthrough();
  app.set_help_all_flag("--help-all", "Expand all help");
  Globals g;
  app.add_option("--seed", g.seed, "Seed for every random choice (default 0)");
  app.add_option("--config", g.config, "Retargeting config document");
  app.add_flag("--require-feasible", g.require_feasible, "Exit with code 70 when a result is infeasible");

  std::function<void()> action;

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic demonstration");
  std::string family_name, out_path;
  MotionFamily fam;
  HumanBody body;
  synth->add_option("--family", family_name, "mirror-arc | clap | converge-tap | sequential-wave | figure-eight")->required();
  synth->add_option("--amplitude", fam.amplitude, "Motion amplitude (m)");
  synth->add_option("--period", fam.period, "Recording length (s)");
  synth->add_option("--phase", fam.phase, "Phase offset (rad)");
  synth->add_option("--separation", fam.separation, "Resting wrist separation (m)");
  synth->add_option("--rate", fam.sample_rate, "Sample rate (Hz)");
  synth->add_option("--noise", fam.noise, "Smooth noise amplitude (m)");
  synth->add_option("--contact-gap", body.contact_gap, "Wrist distance at contact (m); negative crosses the wrists");
  synth->add_option("--out", out_path, "Output demonstration")->required();
  synth->callback([&] {
    action = [&] {
      const auto f = parse_family(family_name);
      if (!f) throw CommandError(kUsage, "usage", "unknown family '" + family_name + "'");
      fam.family = *f;
      const Demonstration d = synth_demo(fam, g.seed, body);
      detail::write(out_path, io::demo_to_json(d));
      out << io::json{{"family", d.name}, {"samples", d.size()}, {"out", out_path}}.dump() << "\n";
    };
  });

  // learn
  auto* learn = app.add_subcommand("learn", "Train the coordination model of a demonstration");
  std::string demo_path, robot_path, result_path;
  learn->add_option("--demo", demo_path)->required();
  learn->add_option("--robot", robot_path)->required();
  learn->add_option("--out", out_path)->required();
  learn->callback([&] {
    action = [&] {
      const RetargetConfig c = detail::load_config(g);
      const CoordinationModel m = train_model(io::load_demo_file(demo_path), io::load_robot_file(robot_path), c.gains);
      detail::write(out_path, io::model_to_json(m));
      out << io::json{{"channels", kChannelCount}, {"basis", m.dmp[0].n_basis()}, {"out", out_path}}.dump() << "\n";
    };
  });

  // retarget
  auto* retarget = app.add_subcommand("retarget", "Run the full retargeting pipeline");
  retarget->add_option("--demo", demo_path)->required();
  retarget->add_option("--robot", robot_path)->required();
  retarget->add_option("--out", out_path)->required();
  retarget->callback([&] {
    action = [&] {
      const RetargetConfig c = detail::load_config(g);
      const RetargetResult r = retarget_pipeline(io::load_demo_file(demo_path), io::load_robot_file(robot_path), c);
      detail::write(out_path, io::result_to_json(r));
      out << detail::summary(r, out_path).dump() << "\n";
      detail::check_feasible(g, r.feasible, "retargeted trajectory");
    };
  });

  // baseline
  auto* baseline = app.add_subcommand("baseline", "Run a baseline retargeting method");
  std::string method;
  std::optional<double> ratio;
  baseline->add_option("--method", method)->required()->check(CLI::IsMember({"pure-ik", "pos-scaling"}));
  baseline->add_option("--demo", demo_path)->required();
  baseline->add_option("--robot", robot_path)->required();
  baseline->add_option("--out", out_path)->required();
  baseline->add_option("--ratio", ratio, "Position-scaling ratio for both arms (default: link-length ratio)");
  baseline->callback([&] {
    action = [&] {
      const RetargetConfig c = detail::load_config(g);
      const Demonstration d = io::load_demo_file(demo_path);
      const RobotModel robot = io::load_robot_file(robot_path);
      const RetargetResult r =
          method == "pure-ik"
              ? baseline_pure_ik(d, robot, c)
              : baseline_position_scaling(d, robot, ratio ? std::optional<ScalingRatios>({*ratio, *ratio}) : std::nullopt, c);
      detail::write(out_path, io::result_to_json(r));
      out << detail::summary(r, out_path).dump() << "\n";
      detail::check_feasible(g, r.feasible, method + " trajectory");
    };
  });

  // eval
  auto* eval = app.add_subcommand("eval", "Score a result against its demonstration");
  eval->add_option("--demo", demo_path)->required();
  eval->add_option("--result", result_path)->required();
  eval->add_option("--robot", robot_path)->required();
  eval->add_option("--out", out_path, "Optional report document");
  eval->callback([&] {
    action = [&] {
      const RetargetConfig c = detail::load_config(g);
      const RobotModel robot = io::load_robot_file(robot_path);
      const RetargetResult r = io::load_result_file(result_path);
      validate(r.Q, robot.dof());
      const SimilarityReport rep = evaluate_result(io::load_demo_file(demo_path), r, robot, c.max_step);
      if (!out_path.empty()) detail::write(out_path, io::report_to_json(rep));
      out << io::report_table({rep});
      detail::check_feasible(g, rep.feasible, "evaluated trajectory");
    };
  });

  // compare
  auto* compare = app.add_subcommand("compare", "Run all methods over a set of motions");
  std::string motions_dir, table_path;
  bool suite = false;
  double suite_noise = 0.0;
  int jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  auto* motions_opt = compare->add_option("--motions", motions_dir, "Directory of demonstration documents");
  compare->add_flag("--suite", suite, "Use the five built-in synthetic families instead of a directory")->excludes(motions_opt);
  compare->add_option("--suite-noise", suite_noise, "Noise amplitude for --suite (m)");
  compare->add_option("--robot", robot_path)->required();
  compare->add_option("--out", out_path, "Comparison document")->required();
  compare->add_option("--table", table_path, "Optional text table");
  compare->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
  compare->callback([&] {
    action = [&] {
      if (!suite && motions_dir.empty()) throw CommandError(kUsage, "usage", "compare needs --motions DIR or --suite");
      const RetargetConfig c = detail::load_config(g);
      const RobotModel robot = io::load_robot_file(robot_path);
      std::vector<Demonstration> demos;
      if (suite) {
        for (Family f : {Family::MirrorArc, Family::Clap, Family::ConvergeTap, Family::SequentialWave, Family::FigureEight}) {
          MotionFamily mf;
          mf.family = f;
          mf.noise = suite_noise;
          demos.push_back(synth_demo(mf, g.seed));
        }
      } else {
        for (const auto& p : detail::motion_files(motions_dir)) demos.push_back(io::load_demo_file(p));
      }
      const auto reports = compare_methods(demos, robot, c, jobs);
      detail::write(out_path, comparison_to_json(reports, robot, c));
      const std::string table = io::report_table(reports) + "\n" + detail::success_table(reports);
      if (!table_path.empty()) io::write_file_atomic(table_path, table);
      out << table;
      bool ours_ok = true;
      for (const auto& r : reports)
        if (r.method == "ours") ours_ok = ours_ok && r.feasible;
      detail::check_feasible(g, ours_ok, "at least one retargeted motion");
    };
  });

  // plot
  auto* plot_cmd = app.add_subcommand("plot", "Write per-channel column files and figures");
  plot_cmd->add_option("--demo", demo_path)->required();
  plot_cmd->add_option("--result", result_path)->required();
  plot_cmd->add_option("--robot", robot_path)->required();
  plot_cmd->add_option("--out", out_path, "Output directory")->required();
  plot_cmd->callback([&] {
    action = [&] {
      const RobotModel robot = io::load_robot_file(robot_path);
      const RetargetResult r = io::load_result_file(result_path);
      validate(r.Q, robot.dof());
      const auto series = plot::build_series(io::load_demo_file(demo_path), r, robot);
      const std::filesystem::path dir(out_path);
      for (const auto& s : series) {
        io::write_file_atomic(dir / (s.name + ".demo.tsv"), plot::columns(s.t_demo, s.demo, s.components));
        io::write_file_atomic(dir / (s.name + ".robot.tsv"), plot::columns(s.t_robot, s.robot, s.components));
        io::write_file_atomic(dir / (s.name + ".svg"), plot::svg(s));
      }
      out << io::json{{"channels", series.size()}, {"out", out_path}}.dump() << "\n";
    };
  });

  std::vector<std::string> argv_store = args;
  if (argv_store.empty()) argv_store.push_back("dualarm");
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    detail::error_json(err, kUsage, "usage", e.what());
    return kUsage;
  }

  try {
    if (action) action();
    return kOk;
  } catch (const CommandError& e) {
    detail::error_json(err, e.code(), e.kind(), e.what());
    return e.code();
  } catch (const ParseError& e) {
    detail::error_json(err, kBadInput, "parse", e.what(), e.locus());
    return kBadInput;
  } catch (const InvariantError& e) {
    detail::error_json(err, kBadInput, "invariant", e.what());
    return kBadInput;
  } catch (const DimensionError& e) {
    detail::error_json(err, kBadInput, "dimension", e.what());
    return kBadInput;
  } catch (const std::exception& e) {
    detail::error_json(err, kFailure, "internal", e.what());
    return kFailure;
  }
}

inline int run_command(int argc, char** argv) { return run_command(std::vector<std::string>(argv, argv + argc)); }

}  // namespace dualarm::cli
