#pragma once

#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "filesafe/explorer.hpp"
#include "filesafe/parser.hpp"
#include "filesafe/printer.hpp"
#include "filesafe/report.hpp"

namespace filesafe::cli {

inline constexpr int kExitSafe = 0;
inline constexpr int kExitUnsafe = 1;
inline constexpr int kExitUnknown = 2;
inline constexpr int kExitUsage = 64;

inline int exit_code(VerdictKind k) {
  switch (k) {
    case VerdictKind::Safe: return kExitSafe;
    case VerdictKind::Unsafe: return kExitUnsafe;
    case VerdictKind::Unknown: return kExitUnknown;
  }
  return kExitUsage;
}

inline int exit_code(RunEnd e) {
  switch (e) {
    case RunEnd::Final: return 0;
    case RunEnd::Stuck: return 1;
    case RunEnd::Cutoff: return 2;
  }
  return kExitUsage;
}

struct CommonArgs {
  std::string program_path;
  std::string mode;  // empty: infer from extension
  std::string read_mode = "cursor";
  std::uint32_t forkfor_max = 2;
  std::uint64_t max_steps = 10'000;
  std::uint64_t max_states = 1'000'000;
  std::string fs_path;
  bool truthy = false;
  bool strict_forkfor = false;

  Mode resolved_mode() const {
    if (mode == "safe") return Mode::SafeWhileF;
    if (mode == "whilef") return Mode::WhileF;
    const bool swf = program_path.size() >= 4 && program_path.substr(program_path.size() - 4) == ".swf";
    return swf ? Mode::SafeWhileF : Mode::WhileF;
  }

  Bounds bounds() const { return {forkfor_max, max_steps, max_states, strict_forkfor}; }

  StepOptions step_options() const {
    return {read_mode == "oracle" ? ReadMode::Oracle : ReadMode::Cursor, truthy};
  }
};

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Loaded {
  Program program;
  Configuration initial;
};

inline Loaded load(const CommonArgs& args) {
  Program p = [&] {
    try {
      return parse_program(read_text(args.program_path), args.resolved_mode());
    } catch (const SyntaxError& e) {
      throw Error(args.program_path + ":" + e.what());
    } catch (const ModeError& e) {
      throw Error(args.program_path + ":" + e.what());
    }
  }();
  FsSpec fs = args.fs_path.empty() ? FsSpec{} : load_fs_spec(args.fs_path);
  fs = with_defaults(std::move(fs), p.files);
  Configuration c0 = initial_config(p, fs.store, fs.status);
  return {std::move(p), std::move(c0)};
}

inline std::string summary_line(const Configuration& c) {
  return control_string(c.control, 3) + " | " + env_string(c.env) + " | " + status_string(c.status);
}

inline std::string step_line(const Successor& s) {
  return std::string(rule_name(s.rule.rule)) + " [" + to_string(s.rule.choice) + "] ⇒ " + summary_line(s.config);
}

inline std::string stuck_line(const Configuration& c) {
  auto r = head_rule(c);
  return "Stuck at rule " + std::string(r ? rule_name(*r) : "none") + ": " + control_string(c.control, 3);
}

inline ReportFlags report_flags(const CommonArgs& args, Mode mode) {
  return {std::string(mode_name(mode)), mode == Mode::WhileF ? args.read_mode : "n/a", args.truthy};
}

inline int cmd_check(const CommonArgs& args, const std::string& json_path, std::ostream& out) {
  const Loaded in = load(args);
  const Bounds bounds = args.bounds();
  const auto t0 = std::chrono::steady_clock::now();
  const Exploration ex = explore_detailed(in.initial, bounds, args.step_options());
  const auto ms =
      std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0).count();
  const Report report = make_report(ex, bounds, report_flags(args, in.program.mode), ms);

  const VerdictKind kind = kind_of(ex.verdict);
  std::string upper(verdict_name(kind));
  for (auto& ch : upper) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  out << "program: " << args.program_path << " (mode " << report.flags.mode << ", read-mode "
      << report.flags.read_mode << ")\n";
  out << "verdict: " << upper << "\n";
  out << "states visited: " << ex.states_visited << "\n";
  out << "normal forms: " << ex.normal_forms << "\n";
  out << "bounds: forkfor-max=" << bounds.forkfor_max << " max-steps=" << bounds.max_steps
      << " max-states=" << bounds.max_states << "\n";
  if (const auto* u = std::get_if<verdict::Unsafe>(&ex.verdict)) {
    out << "witness (" << u->witness.size() << " steps):\n";
    out << "  0. " << summary_line(u->witness.start) << "\n";
    for (std::size_t i = 0; i < u->witness.steps.size(); ++i)
      out << "  " << (i + 1) << ". " << step_line(u->witness.steps[i]) << "\n";
    out << stuck_line(u->stuck) << "\n";
  } else if (const auto* k = std::get_if<verdict::Unknown>(&ex.verdict)) {
    out << "exhausted: " << exhausted_name(k->exhausted) << " (frontier " << k->frontier << ")\n";
  }

  if (!json_path.empty()) {
    std::ofstream js(json_path, std::ios::binary);
    if (!js) throw Error("cannot write '" + json_path + "'");
    js << to_json(report).dump(2) << "\n";
  }
  return exit_code(kind);
}

inline int cmd_run(const CommonArgs& args, std::optional<std::uint64_t> seed, std::ostream& out) {
  const Loaded in = load(args);
  const Run run = run_single(in.initial, seed ? Policy::seeded(*seed) : Policy::first_choice(), args.bounds(),
                             args.step_options());
  out << "start ⇒ " << summary_line(run.trace.start) << "\n";
  for (const auto& s : run.trace.steps) out << step_line(s) << "\n";
  switch (run.end) {
    case RunEnd::Final:
      out << "Final: " << control_string(run.trace.last().control) << "\n";
      break;
    case RunEnd::Stuck:
      out << stuck_line(run.trace.last()) << "\n";
      break;
    case RunEnd::Cutoff:
      out << "Cutoff after " << run.trace.size() << " steps\n";
      break;
  }
  return exit_code(run.end);
}

inline int cmd_relax(const std::string& input, const std::string& output, std::ostream& out) {
  const Program p = parse_program(read_text(input), Mode::SafeWhileF);
  const std::string text = pretty_print(relax_program(p)) + "\n";
  if (output.empty() || output == "-") {
    out << text;
  } else {
    std::ofstream os(output, std::ios::binary);
    if (!os) throw Error("cannot write '" + output + "'");
    os << text;
  }
  return 0;
}

inline void add_common(CLI::App& sub, CommonArgs& a) {
  sub.add_option("program", a.program_path, "Program file")->required();
  sub.add_option("--mode", a.mode, "Language: whilef or safe (default: safe for .swf files, else whilef)")
      ->check(CLI::IsMember({"whilef", "safe"}));
  sub.add_option("--read-mode", a.read_mode, "whilef read: cursor or oracle")
      ->check(CLI::IsMember({"cursor", "oracle"}))
      ->capture_default_str();
  sub.add_option("--forkfor-max", a.forkfor_max, "Largest forkfor copy count explored")->capture_default_str();
  sub.add_option("--max-steps", a.max_steps, "Depth bound per path")->capture_default_str()->check(CLI::PositiveNumber);
  sub.add_option("--max-states", a.max_states, "Distinct state bound")->capture_default_str()->check(CLI::PositiveNumber);
  sub.add_option("--fs", a.fs_path, "Virtual filesystem JSON");
  sub.add_flag("--truthy", a.truthy, "Treat any nonzero guard as true");
  sub.add_flag("--strict-forkfor", a.strict_forkfor, "Report Unknown when forkfor expansion was clipped");
}

/// Entry point shared by the executable and the tests. Returns the process
/// exit code.
inline int run_cli(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"filesafe: file-safety checker for whilef / safe-mode programs"};
  app.require_subcommand(1);

  CommonArgs check_args, run_args;
  std::string json_path;
  auto* check = app.add_subcommand("check", "Explore all executions and report a safety verdict");
  add_common(*check, check_args);
  check->add_option("--json", json_path, "Write the JSON report here");

  auto* run = app.add_subcommand("run", "Execute one schedule and print its trace");
  add_common(*run, run_args);
  std::optional<std::uint64_t> seed;
  bool first = false;
  auto* seed_opt = run->add_option("--seed", seed, "Pick successors pseudorandomly from this seed");
  run->add_flag("--first", first, "Always take the first successor (default)")->excludes(seed_opt);

  std::string relax_in, relax_out;
  auto* relax = app.add_subcommand("relax", "Rewrite a safe-mode program into whilef with fresh pointers");
  relax->add_option("program", relax_in, "Safe-mode program file")->required();
  relax->add_option("-o,--output", relax_out, "Output path (default: standard output)");

  std::vector<const char*> cargv;
  cargv.reserve(argv.size() + 1);
  cargv.push_back("filesafe");
  for (const auto& a : argv) cargv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(cargv.size()), cargv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*check) return cmd_check(check_args, json_path, out);
    if (*run) return cmd_run(run_args, seed, out);
    if (*relax) return cmd_relax(relax_in, relax_out, out);
  } catch (const Error& e) {
    err << "filesafe: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace filesafe::cli
