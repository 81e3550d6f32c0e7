#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "filesafe/ast.hpp"
#include "filesafe/machine.hpp"
#include "filesafe/semantics.hpp"

namespace filesafe {

struct Trace {
  Configuration start;
  std::vector<Successor> steps;

  const Configuration& last() const { return steps.empty() ? start : steps.back().config; }
  std::size_t size() const { return steps.size(); }

  bool operator==(const Trace&) const = default;
};

enum class Exhausted { Steps, States, ForkFor };

inline std::string_view exhausted_name(Exhausted e) {
  switch (e) {
    case Exhausted::Steps: return "steps";
    case Exhausted::States: return "states";
    case Exhausted::ForkFor: return "forkfor";
  }
  return "?";
}

namespace verdict {
struct Safe {
  std::size_t normal_forms;
  std::size_t states_visited;
  bool operator==(const Safe&) const = default;
};
struct Unsafe {
  Trace witness;
  Configuration stuck;
  bool operator==(const Unsafe&) const = default;
};
struct Unknown {
  Exhausted exhausted;
  std::size_t frontier;
  bool operator==(const Unknown&) const = default;
};
}  // namespace verdict

using Verdict = std::variant<verdict::Safe, verdict::Unsafe, verdict::Unknown>;

enum class VerdictKind { Safe, Unsafe, Unknown };

inline VerdictKind kind_of(const Verdict& v) { return static_cast<VerdictKind>(v.index()); }

inline std::string_view verdict_name(VerdictKind k) {
  switch (k) {
    case VerdictKind::Safe: return "safe";
    case VerdictKind::Unsafe: return "unsafe";
    case VerdictKind::Unknown: return "unknown";
  }
  return "?";
}

inline bool is_stuck(const Configuration& c, const Bounds& bounds = {}, const StepOptions& opts = {}) {
  return classify(c) == Classification::NonFinal && step(c, bounds, opts).empty();
}

// Full outcome of a search, including what the verdict summarizes.
struct Exploration {
  Verdict verdict;
  std::size_t states_visited = 0;
  std::size_t normal_forms = 0;
  std::vector<Configuration> finals;
  std::map<Rule, std::size_t> rule_counts;
  bool forkfor_clipped = false;
};

/// Breadth-first search over the deduplicated successor graph. Stops at the
/// first stuck configuration, which is therefore at minimal depth.
inline Exploration explore_detailed(const Configuration& c0, const Bounds& bounds = {}, const StepOptions& opts = {}) {
  struct Node {
    Configuration config;
    std::size_t parent;
    std::optional<RuleInstance> via;
    std::uint64_t depth;
  };
  constexpr std::size_t kRoot = static_cast<std::size_t>(-1);

  Exploration result;
  std::vector<Node> nodes;
  std::unordered_map<Digest, std::size_t> seen;
  std::deque<std::size_t> queue;

  nodes.push_back({c0, kRoot, std::nullopt, 0});
  seen.emplace(canonical_key(c0), 0);
  queue.push_back(0);

  std::optional<Exhausted> exhausted;
  std::size_t frontier = 0;

  auto witness_for = [&](std::size_t idx) {
    std::vector<std::size_t> chain;
    for (std::size_t i = idx; nodes[i].parent != kRoot; i = nodes[i].parent) chain.push_back(i);
    Trace t{c0, {}};
    for (auto it = chain.rbegin(); it != chain.rend(); ++it) t.steps.push_back({*nodes[*it].via, nodes[*it].config});
    return t;
  };

  while (!queue.empty()) {
    const std::size_t idx = queue.front();
    queue.pop_front();
    auto succs = step(nodes[idx].config, bounds, opts);
    if (succs.empty()) {
      if (classify(nodes[idx].config) == Classification::Final) {
        ++result.normal_forms;
        result.finals.push_back(nodes[idx].config);
        continue;
      }
      result.states_visited = nodes.size();
      Trace w = witness_for(idx);
      result.verdict = verdict::Unsafe{std::move(w), nodes[idx].config};
      return result;
    }
    if (nodes[idx].depth >= bounds.max_steps) {
      if (!exhausted) exhausted = Exhausted::Steps;
      ++frontier;
      continue;
    }
    const std::uint64_t depth = nodes[idx].depth + 1;
    for (auto& s : succs) {
      ++result.rule_counts[s.rule.rule];
      if (s.rule.rule == Rule::ForkFor) result.forkfor_clipped = true;
      const Digest key = canonical_key(s.config);
      if (seen.contains(key)) continue;
      if (nodes.size() >= bounds.max_states) {
        if (!exhausted) exhausted = Exhausted::States;
        ++frontier;
        continue;
      }
      seen.emplace(key, nodes.size());
      nodes.push_back({std::move(s.config), idx, std::move(s.rule), depth});
      queue.push_back(nodes.size() - 1);
    }
  }

  result.states_visited = nodes.size();
  if (exhausted) {
    result.verdict = verdict::Unknown{*exhausted, frontier};
  } else if (bounds.strict_forkfor && result.forkfor_clipped) {
    result.verdict = verdict::Unknown{Exhausted::ForkFor, 0};
  } else {
    result.verdict = verdict::Safe{result.normal_forms, result.states_visited};
  }
  return result;
}

/// File-safety verdict: Safe when every reachable normal form is final,
/// Unsafe with a shortest witness otherwise, Unknown when a bound was hit.
inline Verdict explore(const Configuration& c0, const Bounds& bounds = {}, const StepOptions& opts = {}) {
  return explore_detailed(c0, bounds, opts).verdict;
}

namespace detail {

struct OracleSearch {
  const Bounds& bounds;
  const StepOptions& opts;
  std::vector<Successor> path;
  std::optional<Trace> best;
  Configuration start;
  std::size_t nodes = 0;
  std::size_t leaves = 0;
  std::size_t frontier = 0;
  std::optional<Exhausted> exhausted;

  void visit(const Configuration& c) {
    ++nodes;
    auto succs = step(c, bounds, opts);
    if (succs.empty()) {
      if (classify(c) == Classification::Final) {
        ++leaves;
      } else if (!best || path.size() < best->steps.size()) {
        best = Trace{start, path};
      }
      return;
    }
    // A shorter witness is already known below this depth.
    if (best && path.size() + 1 >= best->steps.size()) return;
    if (path.size() >= bounds.max_steps) {
      if (!exhausted) exhausted = Exhausted::Steps;
      ++frontier;
      return;
    }
    for (auto& s : succs) {
      if (on_path(s.config)) continue;
      if (nodes >= bounds.max_states) {
        if (!exhausted) exhausted = Exhausted::States;
        ++frontier;
        continue;
      }
      path.push_back(std::move(s));
      const Configuration next = path.back().config;
      visit(next);
      path.pop_back();
    }
  }

  bool on_path(const Configuration& c) const {
    if (c == start) return true;
    for (const auto& s : path)
      if (s.config == c) return true;
    return false;
  }
};

}  // namespace detail

/// Reference decision procedure: plain recursive enumeration of the
/// execution tree, with no state sharing between branches. Only repeats of a
/// configuration along the current path are cut. Meant for small instances.
inline Verdict oracle_explore(const Configuration& c0, const Bounds& bounds = {}, const StepOptions& opts = {}) {
  detail::OracleSearch search{bounds, opts, {}, std::nullopt, c0, 0, 0, 0, std::nullopt};
  search.visit(c0);
  if (search.best) {
    Configuration stuck = search.best->last();
    return verdict::Unsafe{std::move(*search.best), std::move(stuck)};
  }
  if (search.exhausted) return verdict::Unknown{*search.exhausted, search.frontier};
  return verdict::Safe{search.leaves, search.nodes};
}

// ---- single executions -------------------------------------------------------

// FirstChoice when seed is empty; otherwise successor index rng() % count
// with std::mt19937_64 seeded by the value.
struct Policy {
  std::optional<std::uint64_t> seed;

  static Policy first_choice() { return {}; }
  static Policy seeded(std::uint64_t s) { return {s}; }
};

enum class RunEnd { Final, Stuck, Cutoff };

inline std::string_view run_end_name(RunEnd e) {
  switch (e) {
    case RunEnd::Final: return "Final";
    case RunEnd::Stuck: return "Stuck";
    case RunEnd::Cutoff: return "Cutoff";
  }
  return "?";
}

struct Run {
  Trace trace;
  RunEnd end;
};

inline Run run_single(const Configuration& c0, const Policy& policy, const Bounds& bounds = {},
                      const StepOptions& opts = {}) {
  std::mt19937_64 rng(policy.seed.value_or(0));
  Run run{Trace{c0, {}}, RunEnd::Cutoff};
  for (;;) {
    const Configuration& cur = run.trace.last();
    auto succs = step(cur, bounds, opts);
    if (succs.empty()) {
      run.end = classify(cur) == Classification::Final ? RunEnd::Final : RunEnd::Stuck;
      return run;
    }
    if (run.trace.size() >= bounds.max_steps) return run;
    const std::size_t pick = policy.seed ? static_cast<std::size_t>(rng() % succs.size()) : 0;
    run.trace.steps.push_back(std::move(succs[pick]));
  }
}

/// Replays a trace through the step relation. Returns the index of the first
/// step that does not follow, or nullopt when the whole trace is valid.
inline std::optional<std::size_t> first_invalid_step(const Trace& t, const Bounds& bounds = {},
                                                     const StepOptions& opts = {}) {
  const Configuration* prev = &t.start;
  for (std::size_t i = 0; i < t.steps.size(); ++i) {
    auto next = fire(*prev, t.steps[i].rule, bounds, opts);
    if (!next || !(*next == t.steps[i].config)) return i;
    prev = &t.steps[i].config;
  }
  return std::nullopt;
}

// ---- safe-mode / whilef correspondence ---------------------------------------

inline constexpr std::string_view kFreshPointerPrefix = "p__";

namespace detail {

struct Relaxer {
  std::size_t next = 0;

  std::string fresh() { return std::string(kFreshPointerPrefix) + std::to_string(next++); }

  AtomPtr atom(const AtomPtr& a) {
    return std::visit(
        [&](const auto& n) -> AtomPtr {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, atom::ReadAt>) {
            return ast::read_nd(n.var, fresh(), n.file);
          } else if constexpr (std::is_same_v<T, atom::BinOp>) {
            AtomPtr l = atom(n.lhs);
            return ast::binop(n.op, l, atom(n.rhs));
          } else if constexpr (std::is_same_v<T, atom::And>) {
            AtomPtr l = atom(n.lhs);
            return ast::conj(l, atom(n.rhs));
          } else if constexpr (std::is_same_v<T, atom::Or>) {
            AtomPtr l = atom(n.lhs);
            return ast::disj(l, atom(n.rhs));
          } else if constexpr (std::is_same_v<T, atom::Assign>) {
            return ast::assign(n.target, atom(n.value));
          } else if constexpr (std::is_same_v<T, atom::If>) {
            AtomPtr c = atom(n.cond);
            AtomPtr t = atom(n.then_branch);
            return ast::if_(c, t, atom(n.else_branch));
          } else if constexpr (std::is_same_v<T, atom::While>) {
            AtomPtr c = atom(n.cond);
            return ast::while_(c, atom(n.body));
          } else if constexpr (std::is_same_v<T, atom::Block>) {
            std::vector<AtomPtr> items;
            for (const auto& item : n.items) items.push_back(atom(item));
            return ast::block(std::move(items));
          } else {
            return a;
          }
        },
        a->node());
  }

  StmtPtr stmt(const StmtPtr& s) {
    return std::visit(
        [&](const auto& n) -> StmtPtr {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, stmt::AtomStmt>) {
            return ast::atom_stmt(atom(n.atom));
          } else if constexpr (std::is_same_v<T, stmt::Seq>) {
            StmtPtr first = stmt(n.first);
            return ast::seq(first, stmt(n.second));
          } else if constexpr (std::is_same_v<T, stmt::Fork>) {
            std::vector<StmtPtr> branches;
            for (const auto& b : n.branches) branches.push_back(stmt(b));
            return ast::fork(std::move(branches));
          } else if constexpr (std::is_same_v<T, stmt::ForkFor>) {
            return ast::forkfor(stmt(n.body));
          } else {
            std::vector<stmt::Guarded> arms;
            for (const auto& arm : n.arms) {
              AtomPtr c = atom(arm.cond);
              arms.push_back({c, stmt(arm.body)});
            }
            return ast::forkif(std::move(arms));
          }
        },
        s->node());
  }
};

}  // namespace detail

/// Rewrites every `x = read(f, e)` into `(x, p__i) = read(f)` with fresh
/// pointer variables numbered in preorder, yielding a whilef program.
inline Program relax_program(const Program& p) {
  if (p.mode != Mode::SafeWhileF) throw ModeError("relax_program expects a safe-mode program");
  detail::Relaxer relaxer;
  return make_program(Mode::WhileF, relaxer.stmt(p.body));
}

/// Maps a safe-mode trace of p onto an oracle-mode whilef trace of
/// relax_program(p). Each read-at becomes a read-nd whose oracle position is
/// the position the safe trace read; steps that only evaluated a position
/// expression have no counterpart and are dropped.
inline Trace embed_trace(const Trace& t, const Program& relaxed, const Bounds& bounds = {}) {
  if (t.start.mode != Mode::SafeWhileF) throw InvalidTraceError("embed_trace expects a safe-mode trace");
  if (relaxed.mode != Mode::WhileF) throw InvalidTraceError("embed_trace expects a relaxed whilef program");
  if (auto bad = first_invalid_step(t, bounds))
    throw InvalidTraceError("safe-mode trace does not replay at step " + std::to_string(*bad));

  const StepOptions oracle{ReadMode::Oracle, false};
  Trace out{initial_config(relaxed, t.start.store, t.start.status), {}};
  out.start.env = t.start.env;

  auto advance = [&](const RuleInstance& ri, std::size_t i) {
    auto next = fire(out.last(), ri, bounds, oracle);
    if (!next)
      throw InvalidTraceError("relaxed program cannot follow step " + std::to_string(i) + " (" +
                              std::string(rule_name(ri.rule)) + ")");
    out.steps.push_back({ri, std::move(*next)});
  };

  std::size_t pending = 0;  // open position evaluations
  const Configuration* prev = &t.start;
  for (std::size_t i = 0; i < t.steps.size(); ++i) {
    const RuleInstance& ri = t.steps[i].rule;
    if (ri.rule == Rule::ReadAtFreeze) {
      ++pending;
    } else if (ri.rule == Rule::ReadAt) {
      std::uint64_t pos = 0;
      const Frame& head = prev->control.front();
      const bool plugged = std::holds_alternative<frame::Value>(head);
      if (plugged) {
        pos = static_cast<std::uint64_t>(std::get<frame::Value>(head).value);
      } else {
        const auto& a = std::get<AtomPtr>(std::get<frame::Ctrl>(head).code);
        pos = static_cast<std::uint64_t>(a->as<atom::ReadAt>()->pos->as<atom::IntLit>()->value);
      }
      if (plugged && pending > 0) --pending;
      if (pending == 0) advance({Rule::ReadNd, choice::OraclePos{pos}}, i);
    } else if (pending == 0) {
      advance(ri, i);
    }
    prev = &t.steps[i].config;
  }
  if ((classify(out.last()) == Classification::Final) != (classify(t.last()) == Classification::Final))
    throw InvalidTraceError("embedded trace and source trace disagree on finality");
  return out;
}

}  // namespace filesafe
