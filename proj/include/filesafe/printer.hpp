#pragma once

#include <string>
#include <type_traits>
#include <variant>

#include "filesafe/ast.hpp"

namespace filesafe {

namespace detail {

// Binding strength used to decide parenthesization. Statement-like atoms
// (assignment, reads, if, while) bind loosest and are wrapped whenever they
// appear as an operand.
enum Prec : int { kStatement = 0, kOr = 1, kAnd = 2, kCmp = 3, kAdd = 4, kMul = 5, kPrimary = 6 };

inline int precedence(const Atom& a) {
  return std::visit(
      [](const auto& n) -> int {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, atom::Or>) return kOr;
        else if constexpr (std::is_same_v<T, atom::And>) return kAnd;
        else if constexpr (std::is_same_v<T, atom::BinOp>) {
          if (is_comparison(n.op)) return kCmp;
          if (n.op == BinaryOp::Add || n.op == BinaryOp::Sub) return kAdd;
          return kMul;
        } else if constexpr (std::is_same_v<T, atom::Assign> || std::is_same_v<T, atom::ReadND> ||
                             std::is_same_v<T, atom::ReadAt> || std::is_same_v<T, atom::If> ||
                             std::is_same_v<T, atom::While>)
          return kStatement;
        else
          return kPrimary;
      },
      a.node());
}

inline void print_atom(const AtomPtr& a, int min_prec, std::string& out);

inline void print_binary(const AtomPtr& lhs, std::string_view op, const AtomPtr& rhs, int prec, std::string& out) {
  print_atom(lhs, prec, out);
  out += ' ';
  out += op;
  out += ' ';
  print_atom(rhs, prec + 1, out);
}

inline void print_atom(const AtomPtr& a, int min_prec, std::string& out) {
  const int prec = precedence(*a);
  const bool wrap = prec < min_prec;
  if (wrap) out += '(';
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, atom::IntLit>) {
          out += std::to_string(n.value);
        } else if constexpr (std::is_same_v<T, atom::Var>) {
          out += n.name;
        } else if constexpr (std::is_same_v<T, atom::BinOp>) {
          print_binary(n.lhs, op_symbol(n.op), n.rhs, prec, out);
        } else if constexpr (std::is_same_v<T, atom::And>) {
          print_binary(n.lhs, "&&", n.rhs, prec, out);
        } else if constexpr (std::is_same_v<T, atom::Or>) {
          print_binary(n.lhs, "||", n.rhs, prec, out);
        } else if constexpr (std::is_same_v<T, atom::Assign>) {
          out += n.target;
          out += " = ";
          print_atom(n.value, kStatement, out);
        } else if constexpr (std::is_same_v<T, atom::If>) {
          out += "if ";
          print_atom(n.cond, kStatement, out);
          out += " then ";
          print_atom(n.then_branch, kStatement, out);
          out += " else ";
          print_atom(n.else_branch, kStatement, out);
        } else if constexpr (std::is_same_v<T, atom::While>) {
          out += "while ";
          print_atom(n.cond, kStatement, out);
          out += " do ";
          print_atom(n.body, kStatement, out);
        } else if constexpr (std::is_same_v<T, atom::Block>) {
          out += '{';
          for (std::size_t i = 0; i < n.items.size(); ++i) {
            if (i) out += "; ";
            print_atom(n.items[i], kStatement, out);
          }
          out += '}';
        } else if constexpr (std::is_same_v<T, atom::Open>) {
          out += "open(" + n.file + ")";
        } else if constexpr (std::is_same_v<T, atom::Close>) {
          out += "close(" + n.file + ")";
        } else if constexpr (std::is_same_v<T, atom::ReadND>) {
          out += "(" + n.var + ", " + n.pos_var + ") = read(" + n.file + ")";
        } else if constexpr (std::is_same_v<T, atom::ReadAt>) {
          out += n.var + " = read(" + n.file + ", ";
          print_atom(n.pos, kStatement, out);
          out += ')';
        } else if constexpr (std::is_same_v<T, atom::Skip>) {
          out += "skip";
        }
      },
      a->node());
  if (wrap) out += ')';
}

inline void print_stmt(const StmtPtr& s, std::string& out) {
  std::visit(
      [&out](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, stmt::AtomStmt>) {
          print_atom(n.atom, kStatement, out);
        } else if constexpr (std::is_same_v<T, stmt::Seq>) {
          print_stmt(n.first, out);
          out += "; ";
          print_stmt(n.second, out);
        } else if constexpr (std::is_same_v<T, stmt::Fork>) {
          out += "fork{";
          for (std::size_t i = 0; i < n.branches.size(); ++i) {
            if (i) out += ", ";
            print_stmt(n.branches[i], out);
          }
          out += '}';
        } else if constexpr (std::is_same_v<T, stmt::ForkFor>) {
          out += "forkfor{";
          print_stmt(n.body, out);
          out += '}';
        } else if constexpr (std::is_same_v<T, stmt::ForkIf>) {
          out += "forkif{";
          for (std::size_t i = 0; i < n.arms.size(); ++i) {
            if (i) out += ", ";
            out += '(';
            print_atom(n.arms[i].cond, kStatement, out);
            out += ", ";
            print_stmt(n.arms[i].body, out);
            out += ')';
          }
          out += '}';
        }
      },
      s->node());
}

}  // namespace detail

inline std::string to_string(const AtomPtr& a) {
  std::string out;
  detail::print_atom(a, detail::kStatement, out);
  return out;
}

inline std::string to_string(const StmtPtr& s) {
  std::string out;
  detail::print_stmt(s, out);
  return out;
}

/// Concrete syntax for a program; parse_program(pretty_print(p), p.mode) == p.
inline std::string pretty_print(const Program& p) { return to_string(p.body); }

}  // namespace filesafe
