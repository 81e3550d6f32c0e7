#pragma once

#include <cctype>
#include <charconv>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "filesafe/ast.hpp"
#include "filesafe/error.hpp"

namespace filesafe {

namespace detail {

enum class Tok {
  Ident,
  Int,
  LParen,
  RParen,
  LBrace,
  RBrace,
  Comma,
  Semi,
  Assign,
  Plus,
  Minus,
  Star,
  Slash,
  Le,
  Ge,
  Lt,
  Gt,
  EqEq,
  Ne,
  AndAnd,
  OrOr,
  End,
};

struct Token {
  Tok kind;
  std::string text;
  std::size_t line;
  std::size_t column;
};

inline bool is_keyword(std::string_view s) {
  static constexpr std::string_view kKeywords[] = {"if",   "then",  "else", "while", "do",      "open",
                                                   "close", "read", "skip", "fork",  "forkfor", "forkif"};
  for (auto k : kKeywords)
    if (k == s) return true;
  return false;
}

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_space();
      const std::size_t line = line_, col = col_;
      if (pos_ >= src_.size()) {
        out.push_back({Tok::End, "end of input", line, col});
        return out;
      }
      const char c = src_[pos_];
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        std::size_t start = pos_;
        while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
          advance();
        out.push_back({Tok::Ident, std::string(src_.substr(start, pos_ - start)), line, col});
        continue;
      }
      if (std::isdigit(static_cast<unsigned char>(c))) {
        std::size_t start = pos_;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) advance();
        out.push_back({Tok::Int, std::string(src_.substr(start, pos_ - start)), line, col});
        continue;
      }
      auto two = [&](char next) { return pos_ + 1 < src_.size() && src_[pos_ + 1] == next; };
      Tok kind;
      std::size_t len = 1;
      switch (c) {
        case '(': kind = Tok::LParen; break;
        case ')': kind = Tok::RParen; break;
        case '{': kind = Tok::LBrace; break;
        case '}': kind = Tok::RBrace; break;
        case ',': kind = Tok::Comma; break;
        case ';': kind = Tok::Semi; break;
        case '+': kind = Tok::Plus; break;
        case '-': kind = Tok::Minus; break;
        case '*': kind = Tok::Star; break;
        case '/': kind = Tok::Slash; break;
        case '=':
          if (two('=')) kind = Tok::EqEq, len = 2;
          else kind = Tok::Assign;
          break;
        case '!':
          if (!two('=')) throw SyntaxError(line, col, "'!='");
          kind = Tok::Ne, len = 2;
          break;
        case '<':
          if (two('=')) kind = Tok::Le, len = 2;
          else kind = Tok::Lt;
          break;
        case '>':
          if (two('=')) kind = Tok::Ge, len = 2;
          else kind = Tok::Gt;
          break;
        case '&':
          if (!two('&')) throw SyntaxError(line, col, "'&&'");
          kind = Tok::AndAnd, len = 2;
          break;
        case '|':
          if (!two('|')) throw SyntaxError(line, col, "'||'");
          kind = Tok::OrOr, len = 2;
          break;
        default:
          throw SyntaxError(line, col, "a token (unexpected character '" + std::string(1, c) + "')");
      }
      std::string text(src_.substr(pos_, len));
      for (std::size_t i = 0; i < len; ++i) advance();
      out.push_back({kind, std::move(text), line, col});
    }
  }

 private:
  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_space() {
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else if (c == '#' || (c == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '/')) {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else {
        break;
      }
    }
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t col_ = 1;
};

class Parser {
 public:
  Parser(std::vector<Token> toks, Mode mode) : toks_(std::move(toks)), mode_(mode) {}

  StmtPtr program() {
    StmtPtr body = stmt_seq(true);
    expect(Tok::End, "end of input");
    return body;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const {
    const std::size_t i = std::min(pos_ + ahead, toks_.size() - 1);
    return toks_[i];
  }
  bool at(Tok k, std::size_t ahead = 0) const { return peek(ahead).kind == k; }
  bool at_kw(std::string_view kw, std::size_t ahead = 0) const {
    return peek(ahead).kind == Tok::Ident && peek(ahead).text == kw;
  }
  const Token& take() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }

  [[noreturn]] void fail(const std::string& expected) const {
    const Token& t = peek();
    throw SyntaxError(t.line, t.column, expected + ", found '" + t.text + "'");
  }

  const Token& expect(Tok k, const char* what) {
    if (!at(k)) fail(what);
    return take();
  }

  void expect_kw(std::string_view kw) {
    if (!at_kw(kw)) fail("'" + std::string(kw) + "'");
    take();
  }

  std::string identifier(const char* what) {
    if (!at(Tok::Ident) || is_keyword(peek().text)) fail(what);
    return take().text;
  }

  [[noreturn]] void mode_error(const Token& t, const std::string& msg) const {
    throw ModeError(std::to_string(t.line) + ":" + std::to_string(t.column) + ": " + msg);
  }

  bool at_seq_end() const {
    return at(Tok::End) || at(Tok::RBrace) || at(Tok::Comma) || at(Tok::RParen);
  }

  StmtPtr stmt_seq(bool allow_fork) {
    std::vector<StmtPtr> parts{stmt(allow_fork)};
    while (at(Tok::Semi)) {
      take();
      if (at_seq_end()) break;
      parts.push_back(stmt(allow_fork));
    }
    StmtPtr out = parts.back();
    for (auto it = parts.rbegin() + 1; it != parts.rend(); ++it) out = ast::seq(*it, out);
    return out;
  }

  StmtPtr stmt(bool allow_fork) {
    if (at_kw("fork") || at_kw("forkfor") || at_kw("forkif")) {
      if (!allow_fork) fail("an atom (fork, forkfor and forkif cannot nest inside fork bodies)");
      const std::string kw = take().text;
      expect(Tok::LBrace, "'{'");
      StmtPtr out;
      if (kw == "fork") {
        std::vector<StmtPtr> branches{stmt_seq(false)};
        while (at(Tok::Comma)) {
          take();
          branches.push_back(stmt_seq(false));
        }
        out = ast::fork(std::move(branches));
      } else if (kw == "forkfor") {
        out = ast::forkfor(stmt_seq(false));
      } else {
        std::vector<stmt::Guarded> arms{guarded()};
        while (at(Tok::Comma)) {
          take();
          arms.push_back(guarded());
        }
        out = ast::forkif(std::move(arms));
      }
      expect(Tok::RBrace, "'}'");
      return out;
    }
    return ast::atom_stmt(atom());
  }

  stmt::Guarded guarded() {
    expect(Tok::LParen, "'('");
    AtomPtr cond = atom();
    expect(Tok::Comma, "','");
    StmtPtr body = stmt_seq(false);
    expect(Tok::RParen, "')'");
    return {std::move(cond), std::move(body)};
  }

  AtomPtr atom() {
    // (x, p) = read(f)
    if (at(Tok::LParen) && at(Tok::Ident, 1) && at(Tok::Comma, 2) && at(Tok::Ident, 3) && at(Tok::RParen, 4) &&
        at(Tok::Assign, 5)) {
      const Token& start = take();
      std::string x = identifier("a variable");
      take();
      std::string p = identifier("a pointer variable");
      take();
      take();
      expect_kw("read");
      expect(Tok::LParen, "'('");
      std::string f = identifier("a file name");
      if (at(Tok::Comma)) fail("')' ((x, p) = read(f) takes only a file name)");
      expect(Tok::RParen, "')'");
      if (mode_ == Mode::SafeWhileF)
        mode_error(start, "'(x, p) = read(f)' is the whilef read form; safe mode requires 'x = read(f, n)'");
      return ast::read_nd(std::move(x), std::move(p), std::move(f));
    }
    if (at(Tok::Ident) && !is_keyword(peek().text) && at(Tok::Assign, 1)) {
      const Token& start = take();
      std::string x = start.text;
      take();
      if (at_kw("read")) {
        take();
        expect(Tok::LParen, "'('");
        std::string f = identifier("a file name");
        if (!at(Tok::Comma)) fail("',' (safe-mode read takes a position: x = read(f, n))");
        take();
        AtomPtr pos = atom();
        expect(Tok::RParen, "')'");
        if (mode_ == Mode::WhileF)
          mode_error(start, "'x = read(f, n)' is the safe-mode read form; whilef requires '(x, p) = read(f)'");
        return ast::read_at(std::move(x), std::move(f), std::move(pos));
      }
      return ast::assign(std::move(x), atom());
    }
    return or_expr();
  }

  AtomPtr or_expr() {
    AtomPtr lhs = and_expr();
    while (at(Tok::OrOr)) {
      take();
      lhs = ast::disj(lhs, and_expr());
    }
    return lhs;
  }

  AtomPtr and_expr() {
    AtomPtr lhs = cmp_expr();
    while (at(Tok::AndAnd)) {
      take();
      lhs = ast::conj(lhs, cmp_expr());
    }
    return lhs;
  }

  std::optional<BinaryOp> cmp_op() const {
    switch (peek().kind) {
      case Tok::Le: return BinaryOp::Le;
      case Tok::Ge: return BinaryOp::Ge;
      case Tok::Lt: return BinaryOp::Lt;
      case Tok::Gt: return BinaryOp::Gt;
      case Tok::EqEq: return BinaryOp::Eq;
      case Tok::Ne: return BinaryOp::Ne;
      default: return std::nullopt;
    }
  }

  AtomPtr cmp_expr() {
    AtomPtr lhs = add_expr();
    while (auto op = cmp_op()) {
      take();
      lhs = ast::binop(*op, lhs, add_expr());
    }
    return lhs;
  }

  AtomPtr add_expr() {
    AtomPtr lhs = mul_expr();
    while (at(Tok::Plus) || at(Tok::Minus)) {
      const BinaryOp op = take().kind == Tok::Plus ? BinaryOp::Add : BinaryOp::Sub;
      lhs = ast::binop(op, lhs, mul_expr());
    }
    return lhs;
  }

  AtomPtr mul_expr() {
    AtomPtr lhs = primary();
    while (at(Tok::Star) || at(Tok::Slash)) {
      const BinaryOp op = take().kind == Tok::Star ? BinaryOp::Mul : BinaryOp::Div;
      lhs = ast::binop(op, lhs, primary());
    }
    return lhs;
  }

  std::int64_t integer(bool negative) {
    const Token& t = expect(Tok::Int, "an integer");
    std::uint64_t magnitude = 0;
    auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), magnitude);
    const std::uint64_t limit =
        static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max()) + (negative ? 1 : 0);
    if (ec != std::errc{} || magnitude > limit) throw SyntaxError(t.line, t.column, "a 64-bit integer");
    if (negative) return static_cast<std::int64_t>(0 - magnitude);
    return static_cast<std::int64_t>(magnitude);
  }

  AtomPtr primary() {
    if (at(Tok::Int)) return ast::lit(integer(false));
    if (at(Tok::Minus) && at(Tok::Int, 1)) {
      take();
      return ast::lit(integer(true));
    }
    if (at(Tok::LParen)) {
      take();
      AtomPtr inner = atom();
      expect(Tok::RParen, "')'");
      return inner;
    }
    if (at(Tok::LBrace)) {
      take();
      std::vector<AtomPtr> items{atom()};
      while (at(Tok::Semi)) {
        take();
        if (at(Tok::RBrace)) break;
        items.push_back(atom());
      }
      expect(Tok::RBrace, "'}'");
      return ast::block(std::move(items));
    }
    if (at(Tok::Ident)) {
      const std::string& word = peek().text;
      if (word == "if") {
        take();
        AtomPtr c = atom();
        expect_kw("then");
        AtomPtr t = atom();
        expect_kw("else");
        AtomPtr e = atom();
        return ast::if_(std::move(c), std::move(t), std::move(e));
      }
      if (word == "while") {
        take();
        AtomPtr c = atom();
        expect_kw("do");
        return ast::while_(std::move(c), atom());
      }
      if (word == "open" || word == "close") {
        const bool is_open = word == "open";
        take();
        expect(Tok::LParen, "'('");
        std::string f = identifier("a file name");
        expect(Tok::RParen, "')'");
        return is_open ? ast::open(std::move(f)) : ast::close(std::move(f));
      }
      if (word == "skip") {
        take();
        return ast::skip();
      }
      if (word == "read") fail("an expression (read is only valid as an assignment: x = read(...))");
      if (!is_keyword(word)) return ast::var(take().text);
    }
    fail("an expression");
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  Mode mode_;
};

}  // namespace detail

/// Parses program text in the given language mode. Throws SyntaxError with
/// line/column on malformed input and ModeError when the read form does not
/// match the mode.
inline Program parse_program(std::string_view text, Mode mode) {
  detail::Parser parser(detail::Lexer(text).run(), mode);
  return make_program(mode, parser.program());
}

}  // namespace filesafe
