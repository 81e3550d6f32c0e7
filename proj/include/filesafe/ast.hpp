#pragma once

#include <cstdint>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "filesafe/digest.hpp"
#include "filesafe/error.hpp"

namespace filesafe {

// Shared immutable pointer with deep (structural) equality.
template <class T>
class Ref {
 public:
  Ref() = default;
  Ref(std::shared_ptr<const T> p) : p_(std::move(p)) {}

  const T& operator*() const { return *p_; }
  const T* operator->() const { return p_.get(); }
  const T* get() const { return p_.get(); }
  explicit operator bool() const { return static_cast<bool>(p_); }

  friend bool operator==(const Ref& a, const Ref& b) {
    if (a.p_ == b.p_) return true;
    if (!a.p_ || !b.p_) return false;
    return *a.p_ == *b.p_;
  }

 private:
  std::shared_ptr<const T> p_;
};

enum class Mode { WhileF, SafeWhileF };

inline std::string_view mode_name(Mode m) { return m == Mode::WhileF ? "whilef" : "safe"; }

enum class BinaryOp { Add, Sub, Mul, Div, Le, Ge, Lt, Gt, Eq, Ne };

inline std::string_view op_symbol(BinaryOp op) {
  switch (op) {
    case BinaryOp::Add: return "+";
    case BinaryOp::Sub: return "-";
    case BinaryOp::Mul: return "*";
    case BinaryOp::Div: return "/";
    case BinaryOp::Le: return "<=";
    case BinaryOp::Ge: return ">=";
    case BinaryOp::Lt: return "<";
    case BinaryOp::Gt: return ">";
    case BinaryOp::Eq: return "==";
    case BinaryOp::Ne: return "!=";
  }
  return "?";
}

inline bool is_comparison(BinaryOp op) { return op >= BinaryOp::Le; }

class Atom;
class Stmt;
using AtomPtr = Ref<Atom>;
using StmtPtr = Ref<Stmt>;

// Grammar-A nodes. Block is the braced atom sequence that while-unrolling
// produces and that if/while bodies may use directly.
namespace atom {
struct IntLit {
  std::int64_t value;
  bool operator==(const IntLit&) const = default;
};
struct Var {
  std::string name;
  bool operator==(const Var&) const = default;
};
struct BinOp {
  BinaryOp op;
  AtomPtr lhs, rhs;
  bool operator==(const BinOp&) const = default;
};
struct And {
  AtomPtr lhs, rhs;
  bool operator==(const And&) const = default;
};
struct Or {
  AtomPtr lhs, rhs;
  bool operator==(const Or&) const = default;
};
struct Assign {
  std::string target;
  AtomPtr value;
  bool operator==(const Assign&) const = default;
};
struct If {
  AtomPtr cond, then_branch, else_branch;
  bool operator==(const If&) const = default;
};
struct While {
  AtomPtr cond, body;
  bool operator==(const While&) const = default;
};
struct Block {
  std::vector<AtomPtr> items;
  bool operator==(const Block&) const = default;
};
struct Open {
  std::string file;
  bool operator==(const Open&) const = default;
};
struct Close {
  std::string file;
  bool operator==(const Close&) const = default;
};
// (var, pos_var) = read(file)
struct ReadND {
  std::string var, pos_var, file;
  bool operator==(const ReadND&) const = default;
};
// var = read(file, pos)
struct ReadAt {
  std::string var, file;
  AtomPtr pos;
  bool operator==(const ReadAt&) const = default;
};
struct Skip {
  bool operator==(const Skip&) const = default;
};
}  // namespace atom

class Atom {
 public:
  using Node = std::variant<atom::IntLit, atom::Var, atom::BinOp, atom::And, atom::Or, atom::Assign, atom::If,
                            atom::While, atom::Block, atom::Open, atom::Close, atom::ReadND, atom::ReadAt,
                            atom::Skip>;

  explicit Atom(Node node) : node_(std::move(node)), digest_(compute_digest(node_)) {}

  const Node& node() const { return node_; }
  const Digest& digest() const { return digest_; }

  template <class T>
  const T* as() const {
    return std::get_if<T>(&node_);
  }

  friend bool operator==(const Atom& a, const Atom& b) { return a.digest_ == b.digest_ && a.node_ == b.node_; }

 private:
  static Digest compute_digest(const Node& node) {
    Hasher h;
    h.tag(static_cast<std::uint8_t>(node.index()));
    std::visit(
        [&h](const auto& n) {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, atom::IntLit>) {
            h.i64(n.value);
          } else if constexpr (std::is_same_v<T, atom::Var>) {
            h.str(n.name);
          } else if constexpr (std::is_same_v<T, atom::BinOp>) {
            h.tag(static_cast<std::uint8_t>(n.op)).digest(n.lhs->digest()).digest(n.rhs->digest());
          } else if constexpr (std::is_same_v<T, atom::And> || std::is_same_v<T, atom::Or>) {
            h.digest(n.lhs->digest()).digest(n.rhs->digest());
          } else if constexpr (std::is_same_v<T, atom::Assign>) {
            h.str(n.target).digest(n.value->digest());
          } else if constexpr (std::is_same_v<T, atom::If>) {
            h.digest(n.cond->digest()).digest(n.then_branch->digest()).digest(n.else_branch->digest());
          } else if constexpr (std::is_same_v<T, atom::While>) {
            h.digest(n.cond->digest()).digest(n.body->digest());
          } else if constexpr (std::is_same_v<T, atom::Block>) {
            h.u64(n.items.size());
            for (const auto& item : n.items) h.digest(item->digest());
          } else if constexpr (std::is_same_v<T, atom::Open> || std::is_same_v<T, atom::Close>) {
            h.str(n.file);
          } else if constexpr (std::is_same_v<T, atom::ReadND>) {
            h.str(n.var).str(n.pos_var).str(n.file);
          } else if constexpr (std::is_same_v<T, atom::ReadAt>) {
            h.str(n.var).str(n.file).digest(n.pos->digest());
          }
        },
        node);
    return h.finish();
  }

  Node node_;
  Digest digest_;
};

namespace stmt {
struct AtomStmt {
  AtomPtr atom;
  bool operator==(const AtomStmt&) const = default;
};
struct Seq {
  StmtPtr first, second;
  bool operator==(const Seq&) const = default;
};
struct Fork {
  std::vector<StmtPtr> branches;
  bool operator==(const Fork&) const = default;
};
struct ForkFor {
  StmtPtr body;
  bool operator==(const ForkFor&) const = default;
};
struct Guarded {
  AtomPtr cond;
  StmtPtr body;
  bool operator==(const Guarded&) const = default;
};
struct ForkIf {
  std::vector<Guarded> arms;
  bool operator==(const ForkIf&) const = default;
};
}  // namespace stmt

class Stmt {
 public:
  using Node = std::variant<stmt::AtomStmt, stmt::Seq, stmt::Fork, stmt::ForkFor, stmt::ForkIf>;

  explicit Stmt(Node node) : node_(std::move(node)), digest_(compute_digest(node_)) {}

  const Node& node() const { return node_; }
  const Digest& digest() const { return digest_; }

  template <class T>
  const T* as() const {
    return std::get_if<T>(&node_);
  }

  friend bool operator==(const Stmt& a, const Stmt& b) { return a.digest_ == b.digest_ && a.node_ == b.node_; }

 private:
  static Digest compute_digest(const Node& node) {
    Hasher h;
    h.tag(0x80 | static_cast<std::uint8_t>(node.index()));
    std::visit(
        [&h](const auto& n) {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, stmt::AtomStmt>) {
            h.digest(n.atom->digest());
          } else if constexpr (std::is_same_v<T, stmt::Seq>) {
            h.digest(n.first->digest()).digest(n.second->digest());
          } else if constexpr (std::is_same_v<T, stmt::Fork>) {
            h.u64(n.branches.size());
            for (const auto& b : n.branches) h.digest(b->digest());
          } else if constexpr (std::is_same_v<T, stmt::ForkFor>) {
            h.digest(n.body->digest());
          } else if constexpr (std::is_same_v<T, stmt::ForkIf>) {
            h.u64(n.arms.size());
            for (const auto& arm : n.arms) h.digest(arm.cond->digest()).digest(arm.body->digest());
          }
        },
        node);
    return h.finish();
  }

  Node node_;
  Digest digest_;
};

struct Program {
  Mode mode = Mode::WhileF;
  StmtPtr body;
  std::set<std::string> files;

  friend bool operator==(const Program&, const Program&) = default;
};

namespace ast {

template <class T>
AtomPtr make_atom(T node) {
  return AtomPtr(std::make_shared<const Atom>(Atom::Node(std::move(node))));
}

template <class T>
StmtPtr make_stmt(T node) {
  return StmtPtr(std::make_shared<const Stmt>(Stmt::Node(std::move(node))));
}

inline AtomPtr lit(std::int64_t n) { return make_atom(atom::IntLit{n}); }
inline AtomPtr var(std::string name) { return make_atom(atom::Var{std::move(name)}); }
inline AtomPtr binop(BinaryOp op, AtomPtr a, AtomPtr b) { return make_atom(atom::BinOp{op, std::move(a), std::move(b)}); }
inline AtomPtr conj(AtomPtr a, AtomPtr b) { return make_atom(atom::And{std::move(a), std::move(b)}); }
inline AtomPtr disj(AtomPtr a, AtomPtr b) { return make_atom(atom::Or{std::move(a), std::move(b)}); }
inline AtomPtr assign(std::string x, AtomPtr v) { return make_atom(atom::Assign{std::move(x), std::move(v)}); }
inline AtomPtr if_(AtomPtr c, AtomPtr t, AtomPtr e) {
  return make_atom(atom::If{std::move(c), std::move(t), std::move(e)});
}
inline AtomPtr while_(AtomPtr c, AtomPtr body) { return make_atom(atom::While{std::move(c), std::move(body)}); }
inline AtomPtr block(std::vector<AtomPtr> items) { return make_atom(atom::Block{std::move(items)}); }
inline AtomPtr open(std::string f) { return make_atom(atom::Open{std::move(f)}); }
inline AtomPtr close(std::string f) { return make_atom(atom::Close{std::move(f)}); }
inline AtomPtr read_nd(std::string x, std::string p, std::string f) {
  return make_atom(atom::ReadND{std::move(x), std::move(p), std::move(f)});
}
inline AtomPtr read_at(std::string x, std::string f, AtomPtr pos) {
  return make_atom(atom::ReadAt{std::move(x), std::move(f), std::move(pos)});
}
inline AtomPtr skip() { return make_atom(atom::Skip{}); }

inline StmtPtr atom_stmt(AtomPtr a) { return make_stmt(stmt::AtomStmt{std::move(a)}); }

// Sequences are kept right-nested: seq(seq(a, b), c) == seq(a, seq(b, c)).
inline StmtPtr seq(StmtPtr first, StmtPtr second) {
  if (const auto* s = first->as<stmt::Seq>()) return seq(s->first, seq(s->second, std::move(second)));
  return make_stmt(stmt::Seq{std::move(first), std::move(second)});
}

inline StmtPtr fork(std::vector<StmtPtr> branches) { return make_stmt(stmt::Fork{std::move(branches)}); }
inline StmtPtr forkfor(StmtPtr body) { return make_stmt(stmt::ForkFor{std::move(body)}); }
inline StmtPtr forkif(std::vector<stmt::Guarded> arms) { return make_stmt(stmt::ForkIf{std::move(arms)}); }

}  // namespace ast

namespace detail {

inline void collect_atoms(const StmtPtr& s, std::vector<AtomPtr>& out) {
  std::visit(
      [&out](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, stmt::AtomStmt>) {
          out.push_back(n.atom);
        } else if constexpr (std::is_same_v<T, stmt::Seq>) {
          collect_atoms(n.first, out);
          collect_atoms(n.second, out);
        } else {
          throw NestedForkError("fork-family statement where only atoms are allowed");
        }
      },
      s->node());
}

inline void collect_files(const AtomPtr& a, std::set<std::string>& out) {
  std::visit(
      [&out](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, atom::BinOp> || std::is_same_v<T, atom::And> ||
                      std::is_same_v<T, atom::Or>) {
          collect_files(n.lhs, out);
          collect_files(n.rhs, out);
        } else if constexpr (std::is_same_v<T, atom::Assign>) {
          collect_files(n.value, out);
        } else if constexpr (std::is_same_v<T, atom::If>) {
          collect_files(n.cond, out);
          collect_files(n.then_branch, out);
          collect_files(n.else_branch, out);
        } else if constexpr (std::is_same_v<T, atom::While>) {
          collect_files(n.cond, out);
          collect_files(n.body, out);
        } else if constexpr (std::is_same_v<T, atom::Block>) {
          for (const auto& item : n.items) collect_files(item, out);
        } else if constexpr (std::is_same_v<T, atom::Open> || std::is_same_v<T, atom::Close> ||
                             std::is_same_v<T, atom::ReadND>) {
          out.insert(n.file);
        } else if constexpr (std::is_same_v<T, atom::ReadAt>) {
          out.insert(n.file);
          collect_files(n.pos, out);
        }
      },
      a->node());
}

inline void collect_files(const StmtPtr& s, std::set<std::string>& out) {
  std::visit(
      [&out](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, stmt::AtomStmt>) {
          collect_files(n.atom, out);
        } else if constexpr (std::is_same_v<T, stmt::Seq>) {
          collect_files(n.first, out);
          collect_files(n.second, out);
        } else if constexpr (std::is_same_v<T, stmt::Fork>) {
          for (const auto& b : n.branches) collect_files(b, out);
        } else if constexpr (std::is_same_v<T, stmt::ForkFor>) {
          collect_files(n.body, out);
        } else if constexpr (std::is_same_v<T, stmt::ForkIf>) {
          for (const auto& arm : n.arms) {
            collect_files(arm.cond, out);
            collect_files(arm.body, out);
          }
        }
      },
      s->node());
}

}  // namespace detail

/// Grammar-A units of a fork-free statement in program order. Sequences
/// flatten; if, while and blocks each stay a single unit.
inline std::vector<AtomPtr> atoms_of(const StmtPtr& s) {
  std::vector<AtomPtr> out;
  detail::collect_atoms(s, out);
  return out;
}

inline std::set<std::string> files_of(const StmtPtr& s) {
  std::set<std::string> out;
  detail::collect_files(s, out);
  return out;
}

inline Program make_program(Mode mode, StmtPtr body) {
  Program p{mode, std::move(body), {}};
  p.files = files_of(p.body);
  return p;
}

}  // namespace filesafe
