#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "filesafe/ast.hpp"
#include "filesafe/digest.hpp"
#include "filesafe/error.hpp"
#include "filesafe/printer.hpp"

namespace filesafe {

// Code waiting on the control sequence. Statement-level code is held as a
// Stmt; a Stmt wrapping a single atom is always unwrapped to the Atom.
using Code = std::variant<AtomPtr, StmtPtr>;

namespace frame {
struct Ctrl {
  Code code;
  bool operator==(const Ctrl&) const = default;
};
// □ op rhs
struct HoleOpRight {
  BinaryOp op;
  AtomPtr rhs;
  bool operator==(const HoleOpRight&) const = default;
};
// lhs op □
struct HoleOpLeft {
  std::int64_t lhs;
  BinaryOp op;
  bool operator==(const HoleOpLeft&) const = default;
};
// target = □
struct HoleAssign {
  std::string target;
  bool operator==(const HoleAssign&) const = default;
};
// if □ then .. else ..
struct HoleIf {
  AtomPtr then_branch, else_branch;
  bool operator==(const HoleIf&) const = default;
};
// var = read(file, □)
struct HoleReadAt {
  std::string var, file;
  bool operator==(const HoleReadAt&) const = default;
};
struct Unit {
  bool operator==(const Unit&) const = default;
};
struct Value {
  std::int64_t value;
  bool operator==(const Value&) const = default;
};
}  // namespace frame

using Frame = std::variant<frame::Ctrl, frame::HoleOpRight, frame::HoleOpLeft, frame::HoleAssign, frame::HoleIf,
                           frame::HoleReadAt, frame::Unit, frame::Value>;

inline bool is_hole(const Frame& f) {
  return std::holds_alternative<frame::HoleOpRight>(f) || std::holds_alternative<frame::HoleOpLeft>(f) ||
         std::holds_alternative<frame::HoleAssign>(f) || std::holds_alternative<frame::HoleIf>(f) ||
         std::holds_alternative<frame::HoleReadAt>(f);
}

enum class FileStatus { Open, Closed };

inline char status_char(FileStatus s) { return s == FileStatus::Open ? 'o' : 'c'; }

using Env = std::map<std::string, std::int64_t, std::less<>>;
using FileStatusTable = std::map<std::string, FileStatus, std::less<>>;

struct FileEntry {
  Ref<std::vector<std::int64_t>> contents;
  std::size_t cursor = 0;

  FileEntry() : contents(std::make_shared<const std::vector<std::int64_t>>()) {}
  explicit FileEntry(std::vector<std::int64_t> data, std::size_t cur = 0)
      : contents(std::make_shared<const std::vector<std::int64_t>>(std::move(data))), cursor(cur) {}

  bool operator==(const FileEntry&) const = default;
};

using FileStore = std::map<std::string, FileEntry, std::less<>>;

inline std::optional<std::int64_t> lookup(const Env& env, std::string_view name) {
  auto it = env.find(name);
  if (it == env.end()) return std::nullopt;
  return it->second;
}

struct Configuration {
  std::vector<Frame> control;
  Env env;
  FileStatusTable status;
  FileStore store;
  Mode mode = Mode::WhileF;

  bool operator==(const Configuration&) const = default;
};

enum class Classification { Final, NonFinal };

/// Final exactly when the control is the unit or a single integer.
inline Classification classify(const Configuration& c) {
  if (c.control.size() == 1 &&
      (std::holds_alternative<frame::Unit>(c.control[0]) || std::holds_alternative<frame::Value>(c.control[0])))
    return Classification::Final;
  return Classification::NonFinal;
}

/// Pushes code onto a control sequence under construction. Atom statements
/// unwrap to their atom and integer literals become values directly.
inline Frame code_frame(const Code& code) {
  if (const auto* s = std::get_if<StmtPtr>(&code)) {
    if (const auto* as = (*s)->as<stmt::AtomStmt>()) return code_frame(as->atom);
    return frame::Ctrl{code};
  }
  const auto& a = std::get<AtomPtr>(code);
  if (const auto* n = a->as<atom::IntLit>()) return frame::Value{n->value};
  return frame::Ctrl{code};
}

/// Restores the control invariants after a rewrite: a value with no hole
/// after it is discarded, and an empty control becomes the unit.
inline void normalize_control(std::vector<Frame>& control) {
  std::size_t drop = 0;
  while (drop + 1 < control.size() && std::holds_alternative<frame::Value>(control[drop]) &&
         !is_hole(control[drop + 1]))
    ++drop;
  if (drop) control.erase(control.begin(), control.begin() + static_cast<std::ptrdiff_t>(drop));
  if (control.empty()) control.push_back(frame::Unit{});
}

/// Initial configuration for a program: its body alone on the control, an
/// empty environment, and the given file statuses and contents with cursors
/// at zero. Entries for files the program does not mention are dropped.
inline Configuration initial_config(const Program& p, const FileStore& fs, const FileStatusTable& status0) {
  Configuration c;
  c.mode = p.mode;
  c.control.push_back(code_frame(p.body));
  normalize_control(c.control);
  for (const auto& f : p.files) {
    auto it = fs.find(f);
    if (it == fs.end()) throw MissingFileError(f);
    FileEntry entry = it->second;
    entry.cursor = 0;
    c.store.emplace(f, std::move(entry));
    auto st = status0.find(f);
    c.status.emplace(f, st == status0.end() ? FileStatus::Closed : st->second);
  }
  return c;
}

namespace detail {

inline void hash_code(Hasher& h, const Code& code) {
  if (const auto* a = std::get_if<AtomPtr>(&code)) {
    h.tag(0).digest((*a)->digest());
  } else {
    h.tag(1).digest(std::get<StmtPtr>(code)->digest());
  }
}

inline void hash_frame(Hasher& h, const Frame& f) {
  h.tag(static_cast<std::uint8_t>(f.index()));
  std::visit(
      [&h](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, frame::Ctrl>) {
          hash_code(h, n.code);
        } else if constexpr (std::is_same_v<T, frame::HoleOpRight>) {
          h.tag(static_cast<std::uint8_t>(n.op)).digest(n.rhs->digest());
        } else if constexpr (std::is_same_v<T, frame::HoleOpLeft>) {
          h.i64(n.lhs).tag(static_cast<std::uint8_t>(n.op));
        } else if constexpr (std::is_same_v<T, frame::HoleAssign>) {
          h.str(n.target);
        } else if constexpr (std::is_same_v<T, frame::HoleIf>) {
          h.digest(n.then_branch->digest()).digest(n.else_branch->digest());
        } else if constexpr (std::is_same_v<T, frame::HoleReadAt>) {
          h.str(n.var).str(n.file);
        } else if constexpr (std::is_same_v<T, frame::Value>) {
          h.i64(n.value);
        }
      },
      f);
}

}  // namespace detail

/// 128-bit fingerprint of the whole configuration (control, environment,
/// statuses, store contents and cursors, mode). Equal configurations give
/// equal keys.
inline Digest canonical_key(const Configuration& c) {
  Hasher h;
  h.tag(static_cast<std::uint8_t>(c.mode));
  h.u64(c.control.size());
  for (const auto& f : c.control) detail::hash_frame(h, f);
  h.u64(c.env.size());
  for (const auto& [name, value] : c.env) h.str(name).i64(value);
  h.u64(c.status.size());
  for (const auto& [name, st] : c.status) h.str(name).tag(static_cast<std::uint8_t>(st));
  h.u64(c.store.size());
  for (const auto& [name, entry] : c.store) {
    h.str(name).u64(entry.contents->size());
    for (auto v : *entry.contents) h.i64(v);
    h.u64(entry.cursor);
  }
  return h.finish();
}

// ---- rendering --------------------------------------------------------------

inline std::string to_string(const Code& code) {
  if (const auto* a = std::get_if<AtomPtr>(&code)) return to_string(*a);
  return to_string(std::get<StmtPtr>(code));
}

inline std::string to_string(const Frame& f) {
  return std::visit(
      [](const auto& n) -> std::string {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, frame::Ctrl>) {
          return to_string(n.code);
        } else if constexpr (std::is_same_v<T, frame::HoleOpRight>) {
          std::string out = "□ ";
          out += op_symbol(n.op);
          out += ' ';
          detail::print_atom(n.rhs, detail::kPrimary, out);
          return out;
        } else if constexpr (std::is_same_v<T, frame::HoleOpLeft>) {
          return std::to_string(n.lhs) + " " + std::string(op_symbol(n.op)) + " □";
        } else if constexpr (std::is_same_v<T, frame::HoleAssign>) {
          return n.target + " = □";
        } else if constexpr (std::is_same_v<T, frame::HoleIf>) {
          return "if □ then " + to_string(n.then_branch) + " else " + to_string(n.else_branch);
        } else if constexpr (std::is_same_v<T, frame::HoleReadAt>) {
          return n.var + " = read(" + n.file + ", □)";
        } else if constexpr (std::is_same_v<T, frame::Unit>) {
          return "·";
        } else {
          return std::to_string(n.value);
        }
      },
      f);
}

/// Control sequence joined with ↦; with a limit, frames past it collapse
/// into an ellipsis.
inline std::string control_string(const std::vector<Frame>& control, std::size_t limit = 0) {
  std::string out;
  const std::size_t shown = limit == 0 ? control.size() : std::min(limit, control.size());
  for (std::size_t i = 0; i < shown; ++i) {
    if (i) out += " ↦ ";
    out += to_string(control[i]);
  }
  if (shown < control.size()) out += " ↦ … (+" + std::to_string(control.size() - shown) + ")";
  return out;
}

inline std::string env_string(const Env& env) {
  std::string out = "{";
  bool first = true;
  for (const auto& [k, v] : env) {
    if (!first) out += ", ";
    first = false;
    out += k + ": " + std::to_string(v);
  }
  return out + "}";
}

inline std::string status_string(const FileStatusTable& st) {
  std::string out = "{";
  bool first = true;
  for (const auto& [k, v] : st) {
    if (!first) out += ", ";
    first = false;
    out += k + ": ";
    out += status_char(v);
  }
  return out + "}";
}

}  // namespace filesafe
