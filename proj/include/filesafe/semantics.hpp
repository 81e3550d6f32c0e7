#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "filesafe/ast.hpp"
#include "filesafe/machine.hpp"

namespace filesafe {

enum class Rule {
  Lookup,
  OpFreezeLeft,
  OpFreezeRight,
  OpApply,
  AndDesugar,
  OrDesugar,
  AssignFreeze,
  AssignApply,
  IfFreeze,
  IfTrue,
  IfFalse,
  WhileUnroll,
  Open,
  Close,
  ReadNd,
  ReadAt,
  ReadAtFreeze,
  Seq,
  Fork,
  ForkFor,
  ForkIf,
  Skip,
};

inline constexpr std::array<std::pair<Rule, std::string_view>, 22> kRuleNames{{
    {Rule::Lookup, "lookup"},
    {Rule::OpFreezeLeft, "op-freeze-left"},
    {Rule::OpFreezeRight, "op-freeze-right"},
    {Rule::OpApply, "op-apply"},
    {Rule::AndDesugar, "and-desugar"},
    {Rule::OrDesugar, "or-desugar"},
    {Rule::AssignFreeze, "assign-freeze"},
    {Rule::AssignApply, "assign-apply"},
    {Rule::IfFreeze, "if-freeze"},
    {Rule::IfTrue, "if-true"},
    {Rule::IfFalse, "if-false"},
    {Rule::WhileUnroll, "while-unroll"},
    {Rule::Open, "open"},
    {Rule::Close, "close"},
    {Rule::ReadNd, "read-nd"},
    {Rule::ReadAt, "read-at"},
    {Rule::ReadAtFreeze, "read-at-freeze"},
    {Rule::Seq, "seq"},
    {Rule::Fork, "fork"},
    {Rule::ForkFor, "forkfor"},
    {Rule::ForkIf, "forkif"},
    {Rule::Skip, "skip"},
}};

inline std::string_view rule_name(Rule r) {
  for (const auto& [rule, name] : kRuleNames)
    if (rule == r) return name;
  return "?";
}

inline std::optional<Rule> rule_from_name(std::string_view name) {
  for (const auto& [rule, n] : kRuleNames)
    if (n == name) return rule;
  return std::nullopt;
}

namespace choice {
struct Unique {
  bool operator==(const Unique&) const = default;
};
// Scheduled (branch, atom-index) pairs, in execution order.
struct Interleave {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> order;
  bool operator==(const Interleave&) const = default;
};
struct ForkCount {
  std::uint32_t k;
  bool operator==(const ForkCount&) const = default;
};
struct OraclePos {
  std::uint64_t n;
  bool operator==(const OraclePos&) const = default;
};
}  // namespace choice

using Choice = std::variant<choice::Unique, choice::Interleave, choice::ForkCount, choice::OraclePos>;

inline std::string to_string(const Choice& c) {
  return std::visit(
      [](const auto& n) -> std::string {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, choice::Unique>) {
          return "unique";
        } else if constexpr (std::is_same_v<T, choice::Interleave>) {
          std::string out = "θ=";
          for (std::size_t i = 0; i < n.order.size(); ++i) {
            if (i) out += ' ';
            out += std::to_string(n.order[i].first) + "." + std::to_string(n.order[i].second);
          }
          return out;
        } else if constexpr (std::is_same_v<T, choice::ForkCount>) {
          return "k=" + std::to_string(n.k);
        } else {
          return "n=" + std::to_string(n.n);
        }
      },
      c);
}

struct RuleInstance {
  Rule rule;
  Choice choice;
  bool operator==(const RuleInstance&) const = default;
};

struct Successor {
  RuleInstance rule;
  Configuration config;
  bool operator==(const Successor&) const = default;
};

// Search limits. forkfor_max bounds the forkfor copy count; the other two
// are consumed by the explorer.
struct Bounds {
  std::uint32_t forkfor_max = 2;
  std::uint64_t max_steps = 10'000;
  std::uint64_t max_states = 1'000'000;
  // Report Unknown instead of Safe whenever a forkfor expansion was clipped.
  bool strict_forkfor = false;

  bool operator==(const Bounds&) const = default;
};

enum class ReadMode { Cursor, Oracle };

inline std::string_view read_mode_name(ReadMode m) { return m == ReadMode::Cursor ? "cursor" : "oracle"; }

struct StepOptions {
  ReadMode read_mode = ReadMode::Cursor;
  // Treat any nonzero guard as true instead of requiring exactly 1.
  bool truthy = false;

  bool operator==(const StepOptions&) const = default;
};

/// φ: file contents at a position, 0 past the end of the file.
inline std::int64_t eval_phi(const FileStore& store, std::string_view f, std::uint64_t n) {
  auto it = store.find(f);
  if (it == store.end()) throw UnknownFileError(std::string(f));
  const auto& data = *it->second.contents;
  return n < data.size() ? data[n] : 0;
}

namespace detail {

inline void shuffle_rec(std::span<const std::size_t> sizes, std::vector<std::size_t>& used,
                        std::vector<std::pair<std::uint32_t, std::uint32_t>>& prefix, std::size_t total,
                        std::vector<choice::Interleave>& out) {
  if (prefix.size() == total) {
    out.push_back({prefix});
    return;
  }
  for (std::size_t b = 0; b < sizes.size(); ++b) {
    if (used[b] == sizes[b]) continue;
    prefix.emplace_back(static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(used[b]));
    ++used[b];
    shuffle_rec(sizes, used, prefix, total, out);
    --used[b];
    prefix.pop_back();
  }
}

}  // namespace detail

/// Every order-preserving shuffle of branches with the given atom counts,
/// lexicographic in the branch sequence.
inline std::vector<choice::Interleave> enumerate_interleavings(std::span<const std::size_t> sizes) {
  std::size_t total = 0;
  for (auto s : sizes) total += s;
  std::vector<choice::Interleave> out;
  std::vector<std::size_t> used(sizes.size(), 0);
  std::vector<std::pair<std::uint32_t, std::uint32_t>> prefix;
  prefix.reserve(total);
  detail::shuffle_rec(sizes, used, prefix, total, out);
  return out;
}

inline std::vector<choice::Interleave> enumerate_interleavings(const std::vector<std::vector<AtomPtr>>& branches) {
  std::vector<std::size_t> sizes;
  sizes.reserve(branches.size());
  for (const auto& b : branches) sizes.push_back(b.size());
  return enumerate_interleavings(std::span<const std::size_t>(sizes));
}

namespace detail {

inline std::optional<std::int64_t> apply_op(BinaryOp op, std::int64_t a, std::int64_t b) {
  const auto ua = static_cast<std::uint64_t>(a), ub = static_cast<std::uint64_t>(b);
  switch (op) {
    case BinaryOp::Add: return static_cast<std::int64_t>(ua + ub);
    case BinaryOp::Sub: return static_cast<std::int64_t>(ua - ub);
    case BinaryOp::Mul: return static_cast<std::int64_t>(ua * ub);
    case BinaryOp::Div:
      if (b == 0) return std::nullopt;
      if (b == -1) return static_cast<std::int64_t>(0 - ua);
      return a / b;
    case BinaryOp::Le: return a <= b;
    case BinaryOp::Ge: return a >= b;
    case BinaryOp::Lt: return a < b;
    case BinaryOp::Gt: return a > b;
    case BinaryOp::Eq: return a == b;
    case BinaryOp::Ne: return a != b;
  }
  return std::nullopt;
}

// Builds successors sharing the tail of the current control.
class Rewriter {
 public:
  Rewriter(const Configuration& c, std::size_t consumed, std::vector<Successor>& out)
      : c_(c), consumed_(consumed), out_(out) {}

  Configuration next(std::initializer_list<Frame> prefix) const { return next(std::vector<Frame>(prefix)); }

  Configuration next(std::vector<Frame> prefix) const {
    Configuration n;
    n.mode = c_.mode;
    n.env = c_.env;
    n.status = c_.status;
    n.store = c_.store;
    prefix.insert(prefix.end(), c_.control.begin() + static_cast<std::ptrdiff_t>(consumed_), c_.control.end());
    n.control = std::move(prefix);
    normalize_control(n.control);
    return n;
  }

  void emit(Rule r, Configuration n, Choice ch = choice::Unique{}) const {
    out_.push_back({{r, std::move(ch)}, std::move(n)});
  }

  void emit(Rule r, std::initializer_list<Frame> prefix) const { emit(r, next(prefix)); }

 private:
  const Configuration& c_;
  std::size_t consumed_;
  std::vector<Successor>& out_;
};

inline AtomPtr body_atom(const StmtPtr& s) {
  auto atoms = atoms_of(s);
  if (atoms.size() == 1) return atoms.front();
  return ast::block(std::move(atoms));
}

inline bool file_has_status(const Configuration& c, const std::string& f, FileStatus want) {
  auto it = c.status.find(f);
  return it != c.status.end() && it->second == want && c.store.contains(f);
}

inline Configuration read_nd_result(const Configuration& base, const atom::ReadND& r, std::uint64_t n,
                                    bool advance_cursor) {
  Configuration next = base;
  const std::int64_t value = eval_phi(next.store, r.file, n);
  next.env[r.pos_var] = static_cast<std::int64_t>(n);
  next.env[r.var] = value;
  if (advance_cursor) next.store.find(r.file)->second.cursor = n + 1;
  return next;
}

inline void step_value(const Configuration& c, std::int64_t v, const StepOptions& opts,
                       std::vector<Successor>& out) {
  if (c.control.size() < 2) return;
  const Rewriter rw(c, 2, out);
  const Frame& hole = c.control[1];
  if (const auto* h = std::get_if<frame::HoleOpRight>(&hole)) {
    rw.emit(Rule::OpFreezeRight, {code_frame(h->rhs), frame::HoleOpLeft{v, h->op}});
  } else if (const auto* h = std::get_if<frame::HoleOpLeft>(&hole)) {
    if (auto r = apply_op(h->op, h->lhs, v)) rw.emit(Rule::OpApply, {frame::Value{*r}});
  } else if (const auto* h = std::get_if<frame::HoleAssign>(&hole)) {
    Configuration n = rw.next({frame::Value{v}});
    n.env[h->target] = v;
    rw.emit(Rule::AssignApply, std::move(n));
  } else if (const auto* h = std::get_if<frame::HoleIf>(&hole)) {
    if (v == 1 || (opts.truthy && v != 0)) rw.emit(Rule::IfTrue, {code_frame(h->then_branch)});
    else if (v == 0) rw.emit(Rule::IfFalse, {code_frame(h->else_branch)});
  } else if (const auto* h = std::get_if<frame::HoleReadAt>(&hole)) {
    if (c.mode != Mode::SafeWhileF || v < 0 || !file_has_status(c, h->file, FileStatus::Open)) return;
    Configuration n = rw.next({});
    n.env[h->var] = eval_phi(n.store, h->file, static_cast<std::uint64_t>(v));
    rw.emit(Rule::ReadAt, std::move(n));
  }
}

inline void step_atom(const Configuration& c, const AtomPtr& a, const Bounds&, const StepOptions& opts,
                      std::vector<Successor>& out) {
  const Rewriter rw(c, 1, out);
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, atom::IntLit>) {
          // Literals are pushed as values; a bare literal frame never occurs.
        } else if constexpr (std::is_same_v<T, atom::Var>) {
          if (auto v = lookup(c.env, n.name)) rw.emit(Rule::Lookup, {frame::Value{*v}});
        } else if constexpr (std::is_same_v<T, atom::BinOp>) {
          rw.emit(Rule::OpFreezeLeft, {code_frame(n.lhs), frame::HoleOpRight{n.op, n.rhs}});
        } else if constexpr (std::is_same_v<T, atom::And>) {
          rw.emit(Rule::AndDesugar, {code_frame(ast::if_(n.lhs, n.rhs, ast::lit(0)))});
        } else if constexpr (std::is_same_v<T, atom::Or>) {
          rw.emit(Rule::OrDesugar, {code_frame(ast::if_(n.lhs, ast::lit(1), n.rhs))});
        } else if constexpr (std::is_same_v<T, atom::Assign>) {
          rw.emit(Rule::AssignFreeze, {code_frame(n.value), frame::HoleAssign{n.target}});
        } else if constexpr (std::is_same_v<T, atom::If>) {
          rw.emit(Rule::IfFreeze, {code_frame(n.cond), frame::HoleIf{n.then_branch, n.else_branch}});
        } else if constexpr (std::is_same_v<T, atom::While>) {
          AtomPtr unrolled = ast::if_(n.cond, ast::block({n.body, a}), ast::skip());
          rw.emit(Rule::WhileUnroll, {code_frame(unrolled)});
        } else if constexpr (std::is_same_v<T, atom::Block>) {
          std::vector<Frame> prefix;
          prefix.reserve(n.items.size());
          for (const auto& item : n.items) prefix.push_back(code_frame(item));
          rw.emit(Rule::Seq, rw.next(std::move(prefix)));
        } else if constexpr (std::is_same_v<T, atom::Open>) {
          if (!file_has_status(c, n.file, FileStatus::Closed)) return;
          Configuration next = rw.next({});
          next.status[n.file] = FileStatus::Open;
          next.store.find(n.file)->second.cursor = 0;
          rw.emit(Rule::Open, std::move(next));
        } else if constexpr (std::is_same_v<T, atom::Close>) {
          if (!file_has_status(c, n.file, FileStatus::Open)) return;
          Configuration next = rw.next({});
          next.status[n.file] = FileStatus::Closed;
          rw.emit(Rule::Close, std::move(next));
        } else if constexpr (std::is_same_v<T, atom::ReadND>) {
          if (c.mode != Mode::WhileF || !file_has_status(c, n.file, FileStatus::Open)) return;
          const Configuration base = rw.next({});
          if (opts.read_mode == ReadMode::Cursor) {
            const std::uint64_t cur = c.store.find(n.file)->second.cursor;
            rw.emit(Rule::ReadNd, read_nd_result(base, n, cur, true));
          } else {
            const std::uint64_t len = c.store.find(n.file)->second.contents->size();
            for (std::uint64_t pos = 0; pos <= len; ++pos)
              rw.emit(Rule::ReadNd, read_nd_result(base, n, pos, false), choice::OraclePos{pos});
          }
        } else if constexpr (std::is_same_v<T, atom::ReadAt>) {
          if (c.mode != Mode::SafeWhileF) return;
          if (const auto* lit = n.pos->template as<atom::IntLit>()) {
            if (lit->value < 0 || !file_has_status(c, n.file, FileStatus::Open)) return;
            Configuration next = rw.next({});
            next.env[n.var] = eval_phi(next.store, n.file, static_cast<std::uint64_t>(lit->value));
            rw.emit(Rule::ReadAt, std::move(next));
          } else {
            rw.emit(Rule::ReadAtFreeze, {code_frame(n.pos), frame::HoleReadAt{n.var, n.file}});
          }
        } else if constexpr (std::is_same_v<T, atom::Skip>) {
          rw.emit(Rule::Skip, {});
        }
      },
      a->node());
}

inline void step_stmt(const Configuration& c, const StmtPtr& s, const Bounds& bounds, std::vector<Successor>& out) {
  const Rewriter rw(c, 1, out);
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, stmt::AtomStmt>) {
          // Unwrapped by code_frame.
        } else if constexpr (std::is_same_v<T, stmt::Seq>) {
          rw.emit(Rule::Seq, {code_frame(n.first), code_frame(n.second)});
        } else if constexpr (std::is_same_v<T, stmt::Fork>) {
          std::vector<std::vector<AtomPtr>> branches;
          branches.reserve(n.branches.size());
          for (const auto& b : n.branches) branches.push_back(atoms_of(b));
          for (auto& order : enumerate_interleavings(branches)) {
            std::vector<Frame> prefix;
            prefix.reserve(order.order.size());
            for (auto [b, j] : order.order) prefix.push_back(code_frame(branches[b][j]));
            rw.emit(Rule::Fork, rw.next(std::move(prefix)), std::move(order));
          }
        } else if constexpr (std::is_same_v<T, stmt::ForkFor>) {
          for (std::uint32_t k = 0; k <= bounds.forkfor_max; ++k) {
            Frame f = k == 0 ? code_frame(ast::skip())
                             : code_frame(ast::fork(std::vector<StmtPtr>(k, n.body)));
            rw.emit(Rule::ForkFor, rw.next({std::move(f)}), choice::ForkCount{k});
          }
        } else if constexpr (std::is_same_v<T, stmt::ForkIf>) {
          std::vector<StmtPtr> branches;
          branches.reserve(n.arms.size());
          for (const auto& arm : n.arms)
            branches.push_back(ast::atom_stmt(ast::if_(arm.cond, body_atom(arm.body), ast::skip())));
          rw.emit(Rule::ForkIf, {code_frame(ast::fork(std::move(branches)))});
        }
      },
      s->node());
}

}  // namespace detail

/// All one-step successors of a configuration, in a fixed order: fork
/// interleavings lexicographically, forkfor counts and oracle positions
/// ascending. An empty result for a non-final configuration means stuck.
inline std::vector<Successor> step(const Configuration& c, const Bounds& bounds = {}, const StepOptions& opts = {}) {
  std::vector<Successor> out;
  if (c.control.empty()) return out;
  const Frame& head = c.control.front();
  if (const auto* v = std::get_if<frame::Value>(&head)) {
    detail::step_value(c, v->value, opts, out);
  } else if (const auto* ctrl = std::get_if<frame::Ctrl>(&head)) {
    if (const auto* a = std::get_if<AtomPtr>(&ctrl->code)) detail::step_atom(c, *a, bounds, opts, out);
    else detail::step_stmt(c, std::get<StmtPtr>(ctrl->code), bounds, out);
  }
  return out;
}

/// The rule that would rewrite the head of the control, if any rule matches
/// its shape (side conditions aside). Used to name the rule a stuck
/// configuration is blocked on.
inline std::optional<Rule> head_rule(const Configuration& c) {
  if (c.control.empty()) return std::nullopt;
  const Frame& head = c.control.front();
  if (std::holds_alternative<frame::Value>(head)) {
    if (c.control.size() < 2) return std::nullopt;
    const Frame& hole = c.control[1];
    if (std::holds_alternative<frame::HoleOpRight>(hole)) return Rule::OpFreezeRight;
    if (std::holds_alternative<frame::HoleOpLeft>(hole)) return Rule::OpApply;
    if (std::holds_alternative<frame::HoleAssign>(hole)) return Rule::AssignApply;
    if (std::holds_alternative<frame::HoleIf>(hole)) return Rule::IfTrue;
    if (std::holds_alternative<frame::HoleReadAt>(hole)) return Rule::ReadAt;
    return std::nullopt;
  }
  const auto* ctrl = std::get_if<frame::Ctrl>(&head);
  if (!ctrl) return std::nullopt;
  if (const auto* s = std::get_if<StmtPtr>(&ctrl->code)) {
    const auto& node = (*s)->node();
    if (std::holds_alternative<stmt::Seq>(node)) return Rule::Seq;
    if (std::holds_alternative<stmt::Fork>(node)) return Rule::Fork;
    if (std::holds_alternative<stmt::ForkFor>(node)) return Rule::ForkFor;
    if (std::holds_alternative<stmt::ForkIf>(node)) return Rule::ForkIf;
    return std::nullopt;
  }
  const auto& a = std::get<AtomPtr>(ctrl->code);
  return std::visit(
      [&](const auto& n) -> std::optional<Rule> {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, atom::Var>) return Rule::Lookup;
        else if constexpr (std::is_same_v<T, atom::BinOp>) return Rule::OpFreezeLeft;
        else if constexpr (std::is_same_v<T, atom::And>) return Rule::AndDesugar;
        else if constexpr (std::is_same_v<T, atom::Or>) return Rule::OrDesugar;
        else if constexpr (std::is_same_v<T, atom::Assign>) return Rule::AssignFreeze;
        else if constexpr (std::is_same_v<T, atom::If>) return Rule::IfFreeze;
        else if constexpr (std::is_same_v<T, atom::While>) return Rule::WhileUnroll;
        else if constexpr (std::is_same_v<T, atom::Block>) return Rule::Seq;
        else if constexpr (std::is_same_v<T, atom::Open>) return Rule::Open;
        else if constexpr (std::is_same_v<T, atom::Close>) return Rule::Close;
        else if constexpr (std::is_same_v<T, atom::ReadND>) return Rule::ReadNd;
        else if constexpr (std::is_same_v<T, atom::ReadAt>)
          return n.pos->template as<atom::IntLit>() ? Rule::ReadAt : Rule::ReadAtFreeze;
        else if constexpr (std::is_same_v<T, atom::Skip>) return Rule::Skip;
        else return std::nullopt;
      },
      a->node());
}

/// Applies one specific rule instance, for trace replay. Unlike step, this
/// accepts forkfor counts above the bound and oracle positions past the end
/// of the file, since the rules themselves admit any natural number there.
inline std::optional<Configuration> fire(const Configuration& c, const RuleInstance& ri, Bounds bounds = {},
                                         const StepOptions& opts = {}) {
  if (const auto* pos = std::get_if<choice::OraclePos>(&ri.choice); pos && ri.rule == Rule::ReadNd) {
    if (c.mode != Mode::WhileF || c.control.empty()) return std::nullopt;
    const auto* ctrl = std::get_if<frame::Ctrl>(&c.control.front());
    const AtomPtr* a = ctrl ? std::get_if<AtomPtr>(&ctrl->code) : nullptr;
    const auto* r = a ? (*a)->as<atom::ReadND>() : nullptr;
    if (!r || !detail::file_has_status(c, r->file, FileStatus::Open)) return std::nullopt;
    std::vector<Successor> sink;
    return detail::read_nd_result(detail::Rewriter(c, 1, sink).next({}), *r, pos->n, false);
  }
  if (const auto* k = std::get_if<choice::ForkCount>(&ri.choice))
    bounds.forkfor_max = std::max(bounds.forkfor_max, k->k);
  for (auto& s : step(c, bounds, opts))
    if (s.rule == ri) return std::move(s.config);
  return std::nullopt;
}

}  // namespace filesafe
