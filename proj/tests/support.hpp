#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "filesafe/filesafe.hpp"

namespace filesafe::testing {

// ---- corpus ------------------------------------------------------------------------

struct CorpusEntry {
  std::string name;
  std::string file;
  Mode mode = Mode::WhileF;
  ReadMode read_mode = ReadMode::Cursor;
  std::optional<std::string> fs;
  std::uint32_t forkfor_max = 2;
  std::string expected;
  bool terminating = true;
  std::optional<std::size_t> witness_steps;
};

inline std::string corpus_path(const std::string& file) { return std::string(FILESAFE_CORPUS_DIR) + "/" + file; }

inline std::vector<CorpusEntry> load_manifest() {
  const json doc = json::parse(cli::read_text(corpus_path("manifest.json")));
  std::vector<CorpusEntry> out;
  for (const auto& p : doc.at("programs")) {
    CorpusEntry e;
    e.name = p.at("name").get<std::string>();
    e.file = p.at("file").get<std::string>();
    e.mode = p.at("mode") == "safe" ? Mode::SafeWhileF : Mode::WhileF;
    e.read_mode = p.at("read_mode") == "oracle" ? ReadMode::Oracle : ReadMode::Cursor;
    if (!p.at("fs").is_null()) e.fs = p.at("fs").get<std::string>();
    e.forkfor_max = p.at("forkfor_max").get<std::uint32_t>();
    e.expected = p.at("expected").get<std::string>();
    e.terminating = p.at("terminating").get<bool>();
    if (p.contains("witness_steps")) e.witness_steps = p.at("witness_steps").get<std::size_t>();
    out.push_back(std::move(e));
  }
  return out;
}

inline const CorpusEntry& corpus_entry(const std::vector<CorpusEntry>& all, const std::string& name) {
  for (const auto& e : all)
    if (e.name == name) return e;
  throw Error("no corpus entry '" + name + "'");
}

inline Program load_program(const CorpusEntry& e) { return parse_program(cli::read_text(corpus_path(e.file)), e.mode); }

inline FsSpec load_fs(const CorpusEntry& e, const Program& p) {
  FsSpec fs = e.fs ? load_fs_spec(corpus_path(*e.fs)) : FsSpec{};
  return with_defaults(std::move(fs), p.files);
}

inline Configuration initial_of(const CorpusEntry& e) {
  const Program p = load_program(e);
  const FsSpec fs = load_fs(e, p);
  return initial_config(p, fs.store, fs.status);
}

inline Bounds bounds_of(const CorpusEntry& e) {
  Bounds b;
  b.forkfor_max = e.forkfor_max;
  return b;
}

inline StepOptions options_of(const CorpusEntry& e) { return {e.read_mode, false}; }

/// Initial configuration of program text with the given file contents; every
/// mentioned file starts closed.
inline Configuration config_of(std::string_view text, Mode mode,
                               const std::map<std::string, std::vector<std::int64_t>>& files = {}) {
  const Program p = parse_program(text, mode);
  FsSpec fs;
  for (const auto& [name, data] : files) fs.store.emplace(name, FileEntry(data));
  fs = with_defaults(std::move(fs), p.files);
  return initial_config(p, fs.store, fs.status);
}

// ---- random programs ---------------------------------------------------------------

using Rng = std::mt19937_64;

inline std::size_t pick(Rng& rng, std::size_t n) { return static_cast<std::size_t>(rng() % n); }

inline bool coin(Rng& rng, unsigned percent) { return rng() % 100 < percent; }

inline const std::vector<std::string>& var_names() {
  static const std::vector<std::string> names{"x", "y", "z", "i", "n", "p", "q"};
  return names;
}

inline const std::vector<std::string>& file_names() {
  static const std::vector<std::string> names{"f", "g"};
  return names;
}

inline std::string any_var(Rng& rng) { return var_names()[pick(rng, var_names().size())]; }
inline std::string any_file(Rng& rng) { return file_names()[pick(rng, file_names().size())]; }

// Unrestricted generator: arbitrary atom trees for printer/parser checks.
struct WildGen {
  Rng& rng;
  Mode mode;

  AtomPtr expr(int depth) {
    if (depth <= 0 || coin(rng, 30)) {
      if (coin(rng, 50)) return ast::lit(static_cast<std::int64_t>(rng() % 41) - 20);
      return ast::var(any_var(rng));
    }
    switch (pick(rng, 4)) {
      case 0: return ast::binop(static_cast<BinaryOp>(pick(rng, 10)), expr(depth - 1), expr(depth - 1));
      case 1: return ast::conj(expr(depth - 1), expr(depth - 1));
      case 2: return ast::disj(expr(depth - 1), expr(depth - 1));
      default: return atom(depth - 1);
    }
  }

  AtomPtr atom(int depth) {
    const std::size_t kind = depth <= 0 ? 4 + pick(rng, 5) : pick(rng, 10);
    switch (kind) {
      case 0: return ast::if_(expr(depth - 1), atom(depth - 1), atom(depth - 1));
      case 1: return ast::while_(expr(depth - 1), atom(depth - 1));
      case 2: {
        std::vector<AtomPtr> items;
        const std::size_t n = 1 + pick(rng, 3);
        for (std::size_t i = 0; i < n; ++i) items.push_back(atom(depth - 1));
        return ast::block(std::move(items));
      }
      case 3: return ast::assign(any_var(rng), expr(depth - 1));
      case 4: return ast::open(any_file(rng));
      case 5: return ast::close(any_file(rng));
      case 6:
        if (mode == Mode::WhileF) return ast::read_nd(any_var(rng), any_var(rng), any_file(rng));
        return ast::read_at(any_var(rng), any_file(rng), expr(depth - 1));
      case 7: return ast::skip();
      case 8: return ast::assign(any_var(rng), ast::lit(static_cast<std::int64_t>(rng() % 5)));
      default: return expr(depth);
    }
  }

  StmtPtr seq_of(std::size_t n, int depth) {
    StmtPtr out = ast::atom_stmt(atom(depth));
    for (std::size_t i = 1; i < n; ++i) out = ast::seq(out, ast::atom_stmt(atom(depth)));
    return out;
  }

  StmtPtr stmt(int depth) {
    const std::size_t n = 1 + pick(rng, 3);
    StmtPtr out;
    for (std::size_t i = 0; i < n; ++i) {
      StmtPtr part;
      switch (pick(rng, 6)) {
        case 0: {
          std::vector<StmtPtr> branches;
          const std::size_t b = 1 + pick(rng, 3);
          for (std::size_t j = 0; j < b; ++j) branches.push_back(seq_of(1 + pick(rng, 2), depth));
          part = ast::fork(std::move(branches));
          break;
        }
        case 1: part = ast::forkfor(seq_of(1 + pick(rng, 2), depth)); break;
        case 2: {
          std::vector<stmt::Guarded> arms;
          const std::size_t b = 1 + pick(rng, 2);
          for (std::size_t j = 0; j < b; ++j) arms.push_back({expr(depth), seq_of(1 + pick(rng, 2), depth)});
          part = ast::forkif(std::move(arms));
          break;
        }
        default: part = ast::atom_stmt(atom(depth)); break;
      }
      out = out ? ast::seq(out, part) : part;
    }
    return out;
  }
};

// Small programs whose state spaces stay tiny: loop-free, a handful of
// file operations and reads over two short files, at most max_atoms leaf
// atoms in total.
struct SmallGen {
  Rng& rng;
  Mode mode;
  std::size_t max_atoms = 6;

  std::string small_var() { return std::vector<std::string>{"x", "y", "p"}[pick(rng, 3)]; }

  AtomPtr value() {
    switch (pick(rng, 3)) {
      case 0: return ast::lit(static_cast<std::int64_t>(pick(rng, 3)));
      case 1: return ast::var(small_var());
      default:
        return ast::binop(std::vector<BinaryOp>{BinaryOp::Add, BinaryOp::Eq, BinaryOp::Lt, BinaryOp::Div}[pick(rng, 4)],
                          ast::var(small_var()), ast::lit(static_cast<std::int64_t>(pick(rng, 3))));
    }
  }

  AtomPtr leaf() {
    switch (pick(rng, 7)) {
      case 0:
      case 1: return ast::open(any_file(rng));
      case 2: return ast::close(any_file(rng));
      case 3:
        if (mode == Mode::WhileF) return ast::read_nd(small_var(), small_var(), any_file(rng));
        return ast::read_at(small_var(), any_file(rng), coin(rng, 50) ? ast::lit(static_cast<std::int64_t>(pick(rng, 3))) : value());
      case 4: return ast::assign(small_var(), value());
      case 5: return ast::if_(value(), ast::close(any_file(rng)), ast::skip());
      default: return ast::skip();
    }
  }

  StmtPtr chain(std::size_t n) {
    StmtPtr out = ast::atom_stmt(leaf());
    for (std::size_t i = 1; i < n; ++i) out = ast::seq(out, ast::atom_stmt(leaf()));
    return out;
  }

  StmtPtr program() {
    std::size_t budget = 1 + pick(rng, max_atoms);
    StmtPtr out;
    while (budget > 0) {
      StmtPtr part;
      const std::size_t kind = budget >= 2 ? pick(rng, 6) : 5;
      if (kind == 0) {
        const std::size_t a = 1 + pick(rng, budget - 1);
        const std::size_t b = 1 + pick(rng, budget - a);
        part = ast::fork({chain(a), chain(b)});
        budget -= a + b;
      } else if (kind == 1) {
        const std::size_t a = 1 + pick(rng, std::min<std::size_t>(2, budget));
        part = ast::forkfor(chain(a));
        budget -= a;
      } else if (kind == 2) {
        part = ast::forkif({{value(), chain(1)}, {value(), chain(1)}});
        budget -= 2;
      } else {
        part = ast::atom_stmt(leaf());
        budget -= 1;
      }
      out = out ? ast::seq(out, part) : part;
    }
    return out;
  }

  Configuration config() {
    const Program p = make_program(mode, program());
    FsSpec fs;
    fs.store.emplace("f", FileEntry({1, 2}));
    fs.store.emplace("g", FileEntry({0}));
    if (coin(rng, 30)) fs.status.emplace("f", FileStatus::Open);
    fs = with_defaults(std::move(fs), p.files);
    return initial_config(p, fs.store, fs.status);
  }
};

/// Leaf atoms of a statement, collected without the library's flattener.
inline std::size_t leaf_count(const StmtPtr& s) {
  if (const auto* a = s->as<stmt::AtomStmt>()) return a->atom ? 1 : 0;
  if (const auto* q = s->as<stmt::Seq>()) return leaf_count(q->first) + leaf_count(q->second);
  if (const auto* f = s->as<stmt::Fork>()) {
    std::size_t n = 0;
    for (const auto& b : f->branches) n += leaf_count(b);
    return n;
  }
  if (const auto* f = s->as<stmt::ForkFor>()) return leaf_count(f->body);
  std::size_t n = 0;
  for (const auto& arm : s->as<stmt::ForkIf>()->arms) n += leaf_count(arm.body);
  return n;
}

// ---- combinatorics oracles -------------------------------------------------------

inline std::uint64_t multinomial(const std::vector<std::size_t>& sizes) {
  std::uint64_t result = 1;
  std::size_t total = 0;
  for (auto s : sizes) {
    for (std::size_t i = 1; i <= s; ++i) {
      ++total;
      result = result * total / i;
    }
  }
  return result;
}

/// Every order-preserving interleaving, found by permuting the multiset of
/// branch labels.
inline std::set<std::vector<std::pair<std::uint32_t, std::uint32_t>>> brute_force_shuffles(
    const std::vector<std::size_t>& sizes) {
  std::vector<std::uint32_t> labels;
  for (std::size_t b = 0; b < sizes.size(); ++b) labels.insert(labels.end(), sizes[b], static_cast<std::uint32_t>(b));
  std::sort(labels.begin(), labels.end());
  std::set<std::vector<std::pair<std::uint32_t, std::uint32_t>>> out;
  do {
    std::vector<std::uint32_t> next(sizes.size(), 0);
    std::vector<std::pair<std::uint32_t, std::uint32_t>> order;
    for (auto b : labels) order.emplace_back(b, next[b]++);
    out.insert(std::move(order));
  } while (std::next_permutation(labels.begin(), labels.end()));
  return out;
}

/// Every composition-like shape: sequences of positive branch sizes with the
/// given total.
inline void shapes_with_total(std::size_t total, std::vector<std::size_t>& cur,
                              std::vector<std::vector<std::size_t>>& out) {
  if (total == 0) {
    if (!cur.empty()) out.push_back(cur);
    return;
  }
  for (std::size_t s = 1; s <= total; ++s) {
    cur.push_back(s);
    shapes_with_total(total - s, cur, out);
    cur.pop_back();
  }
}

// ---- trace enumeration ------------------------------------------------------------

/// Depth-first enumeration of every maximal trace (no deduplication). Calls
/// visit on each trace that ends in a normal form; stops descending past
/// max_depth. Returns false if the depth bound was hit.
inline bool for_each_normal_trace(const Configuration& c0, const Bounds& bounds, const StepOptions& opts,
                                  std::size_t max_depth, const std::function<void(const Trace&)>& visit) {
  Trace t{c0, {}};
  bool complete = true;
  std::function<void()> rec = [&] {
    auto succs = step(t.last(), bounds, opts);
    if (succs.empty()) {
      visit(t);
      return;
    }
    if (t.size() >= max_depth) {
      complete = false;
      return;
    }
    for (auto& s : succs) {
      t.steps.push_back(std::move(s));
      rec();
      t.steps.pop_back();
    }
  };
  rec();
  return complete;
}

}  // namespace filesafe::testing
