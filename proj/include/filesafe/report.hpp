#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "filesafe/error.hpp"
#include "filesafe/explorer.hpp"
#include "filesafe/machine.hpp"
#include "filesafe/semantics.hpp"

namespace filesafe {

using json = nlohmann::json;

inline constexpr std::string_view kReportSchema = "filesafe-report/1";

// ---- filesystem spec ------------------------------------------------------------

struct FsSpec {
  FileStore store;
  FileStatusTable status;
};

/// {"f": {"status": "o"|"c", "contents": [int, ...]}, ...}; both fields
/// optional, defaulting to "c" and [].
inline FsSpec parse_fs_spec(const json& doc) {
  if (!doc.is_object()) throw SpecError("<root>", "expected an object mapping file names to entries");
  FsSpec spec;
  for (const auto& [name, entry] : doc.items()) {
    if (!entry.is_object()) throw SpecError(name, "expected an object");
    FileStatus st = FileStatus::Closed;
    std::vector<std::int64_t> contents;
    for (const auto& [key, value] : entry.items()) {
      if (key == "status") {
        if (value == "o") st = FileStatus::Open;
        else if (value == "c") st = FileStatus::Closed;
        else throw SpecError(name + ".status", "must be \"o\" or \"c\"");
      } else if (key == "contents") {
        if (!value.is_array()) throw SpecError(name + ".contents", "must be an array of integers");
        for (const auto& v : value) {
          if (!v.is_number_integer()) throw SpecError(name + ".contents", "must be an array of integers");
          contents.push_back(v.get<std::int64_t>());
        }
      } else {
        throw SpecError(name + "." + key, "unknown field");
      }
    }
    spec.store.emplace(name, FileEntry(std::move(contents)));
    spec.status.emplace(name, st);
  }
  return spec;
}

inline FsSpec load_fs_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SpecError(path, "cannot open file");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw SpecError(path, e.what());
  }
  return parse_fs_spec(doc);
}

/// Adds the default entry (closed, empty) for every listed file the spec
/// does not mention.
inline FsSpec with_defaults(FsSpec spec, const std::set<std::string>& files) {
  for (const auto& f : files) {
    spec.store.try_emplace(f);
    spec.status.try_emplace(f, FileStatus::Closed);
  }
  return spec;
}

// ---- choices ---------------------------------------------------------------------

inline json choice_to_json(const Choice& c) {
  return std::visit(
      [](const auto& n) -> json {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, choice::Unique>) {
          return {{"kind", "unique"}};
        } else if constexpr (std::is_same_v<T, choice::Interleave>) {
          json order = json::array();
          for (auto [b, j] : n.order) order.push_back({b, j});
          return {{"kind", "interleave"}, {"order", order}};
        } else if constexpr (std::is_same_v<T, choice::ForkCount>) {
          return {{"kind", "forkfor"}, {"k", n.k}};
        } else {
          return {{"kind", "oracle"}, {"n", n.n}};
        }
      },
      c);
}

inline Choice choice_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "unique") return choice::Unique{};
  if (kind == "forkfor") return choice::ForkCount{j.at("k").get<std::uint32_t>()};
  if (kind == "oracle") return choice::OraclePos{j.at("n").get<std::uint64_t>()};
  if (kind == "interleave") {
    choice::Interleave il;
    for (const auto& p : j.at("order")) il.order.emplace_back(p.at(0).get<std::uint32_t>(), p.at(1).get<std::uint32_t>());
    return il;
  }
  throw Error("unknown choice kind '" + kind + "'");
}

// ---- report ----------------------------------------------------------------------

// Rendered configuration: every control frame in concrete syntax plus the
// environment, statuses and cursors.
struct ConfigView {
  std::vector<std::string> control;
  std::map<std::string, std::int64_t> env;
  std::map<std::string, std::string> status;
  std::map<std::string, std::uint64_t> cursors;

  bool operator==(const ConfigView&) const = default;

  static ConfigView of(const Configuration& c) {
    ConfigView v;
    for (const auto& f : c.control) v.control.push_back(to_string(f));
    v.env.insert(c.env.begin(), c.env.end());
    for (const auto& [k, s] : c.status) v.status.emplace(k, std::string(1, status_char(s)));
    for (const auto& [k, e] : c.store) v.cursors.emplace(k, e.cursor);
    return v;
  }
};

struct ReportStep {
  std::string rule;
  Choice choice;
  ConfigView config;

  bool operator==(const ReportStep&) const = default;
};

struct ReportFlags {
  std::string mode = "whilef";
  std::string read_mode = "cursor";
  bool truthy = false;

  bool operator==(const ReportFlags&) const = default;
};

struct Report {
  std::string verdict = "safe";
  std::optional<std::string> exhausted;
  std::uint64_t frontier = 0;
  bool forkfor_clipped = false;
  std::optional<ConfigView> stuck;
  std::uint64_t states = 0;
  std::uint64_t normal_forms = 0;
  std::optional<std::vector<ReportStep>> witness;
  Bounds bounds;
  ReportFlags flags;
  std::int64_t wall_time_ms = 0;

  bool operator==(const Report&) const = default;
};

inline Report make_report(const Exploration& ex, const Bounds& bounds, const ReportFlags& flags,
                          std::int64_t wall_time_ms) {
  Report r;
  r.verdict = std::string(verdict_name(kind_of(ex.verdict)));
  r.states = ex.states_visited;
  r.normal_forms = ex.normal_forms;
  r.forkfor_clipped = ex.forkfor_clipped;
  r.bounds = bounds;
  r.flags = flags;
  r.wall_time_ms = wall_time_ms;
  if (const auto* u = std::get_if<verdict::Unsafe>(&ex.verdict)) {
    r.stuck = ConfigView::of(u->stuck);
    std::vector<ReportStep> steps;
    for (const auto& s : u->witness.steps)
      steps.push_back({std::string(rule_name(s.rule.rule)), s.rule.choice, ConfigView::of(s.config)});
    r.witness = std::move(steps);
  } else if (const auto* k = std::get_if<verdict::Unknown>(&ex.verdict)) {
    r.exhausted = std::string(exhausted_name(k->exhausted));
    r.frontier = k->frontier;
  }
  return r;
}

inline json config_to_json(const ConfigView& v) {
  return {{"control", v.control}, {"env", v.env}, {"status", v.status}, {"cursors", v.cursors}};
}

inline ConfigView config_from_json(const json& j) {
  ConfigView v;
  v.control = j.at("control").get<std::vector<std::string>>();
  v.env = j.at("env").get<std::map<std::string, std::int64_t>>();
  v.status = j.at("status").get<std::map<std::string, std::string>>();
  v.cursors = j.at("cursors").get<std::map<std::string, std::uint64_t>>();
  return v;
}

inline json to_json(const Report& r) {
  json verdict = {{"kind", r.verdict}, {"forkfor_clipped", r.forkfor_clipped}};
  if (r.exhausted) {
    verdict["exhausted"] = *r.exhausted;
    verdict["frontier"] = r.frontier;
  }
  if (r.stuck) verdict["stuck"] = config_to_json(*r.stuck);

  json witness = nullptr;
  if (r.witness) {
    witness = json::array();
    for (const auto& s : *r.witness) {
      json step = config_to_json(s.config);
      step["rule"] = s.rule;
      step["choice"] = choice_to_json(s.choice);
      witness.push_back(std::move(step));
    }
  }
  return {
      {"schema", kReportSchema},
      {"verdict", verdict},
      {"states", r.states},
      {"normal_forms", r.normal_forms},
      {"witness", witness},
      {"bounds",
       {{"forkfor_max", r.bounds.forkfor_max},
        {"max_steps", r.bounds.max_steps},
        {"max_states", r.bounds.max_states},
        {"strict_forkfor", r.bounds.strict_forkfor}}},
      {"flags",
       {{"mode", r.flags.mode},
        {"read_mode", r.flags.read_mode},
        {"truthy", r.flags.truthy}}},
      {"wall_time_ms", r.wall_time_ms},
  };
}

inline Report report_from_json(const json& j) {
  try {
    if (j.at("schema") != kReportSchema) throw Error("unsupported report schema");
    Report r;
    const json& v = j.at("verdict");
    r.verdict = v.at("kind").get<std::string>();
    r.forkfor_clipped = v.at("forkfor_clipped").get<bool>();
    if (v.contains("exhausted")) {
      r.exhausted = v.at("exhausted").get<std::string>();
      r.frontier = v.at("frontier").get<std::uint64_t>();
    }
    if (v.contains("stuck")) r.stuck = config_from_json(v.at("stuck"));
    r.states = j.at("states").get<std::uint64_t>();
    r.normal_forms = j.at("normal_forms").get<std::uint64_t>();
    if (!j.at("witness").is_null()) {
      std::vector<ReportStep> steps;
      for (const auto& s : j.at("witness"))
        steps.push_back({s.at("rule").get<std::string>(), choice_from_json(s.at("choice")), config_from_json(s)});
      r.witness = std::move(steps);
    }
    const json& b = j.at("bounds");
    r.bounds.forkfor_max = b.at("forkfor_max").get<std::uint32_t>();
    r.bounds.max_steps = b.at("max_steps").get<std::uint64_t>();
    r.bounds.max_states = b.at("max_states").get<std::uint64_t>();
    r.bounds.strict_forkfor = b.at("strict_forkfor").get<bool>();
    const json& f = j.at("flags");
    r.flags.mode = f.at("mode").get<std::string>();
    r.flags.read_mode = f.at("read_mode").get<std::string>();
    r.flags.truthy = f.at("truthy").get<bool>();
    r.wall_time_ms = j.at("wall_time_ms").get<std::int64_t>();
    return r;
  } catch (const json::exception& e) {
    throw Error(std::string("malformed report: ") + e.what());
  }
}

}  // namespace filesafe
