// Runs every acceptance criterion and prints one PASS/FAIL line per criterion.
// Exit status is nonzero if any criterion fails.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>

#include "support.hpp"

namespace {

using namespace filesafe;
using namespace filesafe::testing;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt_seconds(double s) {
  std::ostringstream os;
  os.precision(2);
  os << std::fixed << s << "s";
  return os.str();
}

// 1. Every rule fires somewhere across the corpus.
Outcome rule_coverage(const std::vector<CorpusEntry>& corpus) {
  const auto t0 = Clock::now();
  std::map<Rule, std::size_t> counts;
  for (const auto& e : corpus) {
    const Exploration ex = explore_detailed(initial_of(e), bounds_of(e), options_of(e));
    for (const auto& [r, n] : ex.rule_counts) counts[r] += n;
  }
  const double secs = seconds_since(t0);
  Outcome o;
  std::string missing;
  for (const auto& [rule, name] : kRuleNames)
    if (counts[rule] == 0) missing += " " + std::string(name);
  o.pass = missing.empty() && secs < 10.0;
  o.detail = std::to_string(kRuleNames.size()) + " rules, " + fmt_seconds(secs);
  if (!missing.empty()) o.detail += ", never fired:" + missing;
  return o;
}

// 2. Error classes yield replayable minimal witnesses; the motivating
// example is safe for K = 1, 2, 3.
Outcome error_classes(const std::vector<CorpusEntry>& corpus) {
  Outcome o;
  for (const char* name : {"open_twice", "close_twice", "close_unopened", "read_closed"}) {
    const CorpusEntry& e = corpus_entry(corpus, name);
    const Configuration c0 = initial_of(e);
    const Verdict v = explore(c0, bounds_of(e), options_of(e));
    const auto* u = std::get_if<verdict::Unsafe>(&v);
    if (!u) {
      o.pass = false;
      o.detail += std::string(" ") + name + ":not-unsafe";
      continue;
    }
    const bool replays = !first_invalid_step(u->witness, bounds_of(e), options_of(e)) && u->witness.start == c0 &&
                         u->witness.last() == u->stuck && is_stuck(u->stuck, bounds_of(e), options_of(e));
    // Minimality against the oracle's independent shortest stuck path.
    const Verdict ov = oracle_explore(c0, bounds_of(e), options_of(e));
    const auto* ou = std::get_if<verdict::Unsafe>(&ov);
    const bool minimal = ou && ou->witness.size() == u->witness.size() && e.witness_steps &&
                         *e.witness_steps == u->witness.size();
    if (!replays || !minimal) {
      o.pass = false;
      o.detail += std::string(" ") + name + (replays ? ":not-minimal" : ":no-replay");
    }
  }
  const CorpusEntry& m = corpus_entry(corpus, "motivating");
  for (std::uint32_t k = 1; k <= 3; ++k) {
    Bounds b = bounds_of(m);
    b.forkfor_max = k;
    if (kind_of(explore(initial_of(m), b, {ReadMode::Cursor, false})) != VerdictKind::Safe) {
      o.pass = false;
      o.detail += " motivating:K=" + std::to_string(k);
    }
  }
  if (o.pass) o.detail = "4 error classes unsafe with minimal replayable witnesses; motivating safe for K=1,2,3";
  return o;
}

// 3. Nondeterministic final y in the motivating example.
Outcome nondeterminism(const std::vector<CorpusEntry>& corpus) {
  const CorpusEntry& m = corpus_entry(corpus, "motivating");
  Bounds b = bounds_of(m);
  b.forkfor_max = 3;
  const Exploration ex = explore_detailed(initial_of(m), b, {ReadMode::Cursor, false});
  std::set<std::int64_t> ys;
  for (const auto& f : ex.finals)
    if (auto y = lookup(f.env, "y")) ys.insert(*y);
  std::string list;
  for (auto y : ys) list += (list.empty() ? "" : ",") + std::to_string(y);
  return {kind_of(ex.verdict) == VerdictKind::Safe && ys.size() >= 2,
          std::to_string(ys.size()) + " distinct y values {" + list + "}"};
}

// 4. Fork-free safe-mode configurations step deterministically.
Configuration random_fork_free(Rng& rng) {
  WildGen gen{rng, Mode::SafeWhileF};
  std::vector<AtomPtr> items;
  const std::size_t n = 1 + pick(rng, 4);
  for (std::size_t i = 0; i < n; ++i) items.push_back(gen.atom(3));
  const Program p = make_program(Mode::SafeWhileF, ast::atom_stmt(ast::block(std::move(items))));
  FsSpec fs;
  for (const auto& f : file_names()) {
    std::vector<std::int64_t> data(pick(rng, 4));
    for (auto& d : data) d = static_cast<std::int64_t>(pick(rng, 7)) - 2;
    fs.store.emplace(f, FileEntry(std::move(data)));
    fs.status.emplace(f, coin(rng, 50) ? FileStatus::Open : FileStatus::Closed);
  }
  Configuration c = initial_config(p, fs.store, fs.status);
  for (const auto& v : var_names())
    if (coin(rng, 60)) c.env[v] = static_cast<std::int64_t>(pick(rng, 5)) - 1;
  return c;
}

Outcome safe_determinism() {
  Rng rng(20240601);
  std::size_t checked = 0, violations = 0, unique = 0;
  while (checked < 1000) {
    Configuration c = random_fork_free(rng);
    // Walk a few steps so holes and partially evaluated code are covered.
    const std::size_t walk = pick(rng, 25);
    for (std::size_t i = 0; i <= walk && checked < 1000; ++i) {
      auto succs = step(c, Bounds{}, StepOptions{});
      ++checked;
      if (succs.size() > 1) ++violations;
      if (succs.size() == 1) ++unique;
      if (succs.empty()) break;
      c = std::move(succs.front().config);
    }
  }
  return {violations == 0, std::to_string(checked) + " configurations (" + std::to_string(unique) +
                               " with one successor), " + std::to_string(violations) + " with more than one"};
}

// 5. Every normal-form trace of each safe safe-mode corpus program embeds.
Outcome embedding(const std::vector<CorpusEntry>& corpus) {
  std::size_t traces = 0, failures = 0, programs = 0;
  std::string bad;
  for (const auto& e : corpus) {
    if (e.mode != Mode::SafeWhileF || e.expected != "safe") continue;
    ++programs;
    const Program p = load_program(e);
    const Program relaxed = relax_program(p);
    const Configuration c0 = initial_of(e);
    const Bounds b = bounds_of(e);
    const StepOptions oracle{ReadMode::Oracle, false};
    const bool complete = for_each_normal_trace(c0, b, {}, 2000, [&](const Trace& t) {
      ++traces;
      try {
        const Trace w = embed_trace(t, relaxed, b);
        const Configuration expected_start = initial_config(relaxed, c0.store, c0.status);
        const bool ok = w.start == expected_start && !first_invalid_step(w, b, oracle) &&
                        classify(w.last()) == Classification::Final;
        if (!ok) {
          ++failures;
          bad += " " + e.name;
        }
      } catch (const Error& err) {
        ++failures;
        bad += " " + e.name + "(" + err.what() + ")";
      }
    });
    if (!complete) {
      ++failures;
      bad += " " + e.name + "(depth bound)";
    }
  }
  Outcome o{failures == 0 && traces > 0, std::to_string(traces) + " traces from " + std::to_string(programs) +
                                             " programs, " + std::to_string(failures) + " failed"};
  if (!bad.empty()) o.detail += ":" + bad;
  return o;
}

// 6. No Unknown verdicts for terminating safe-mode corpus programs.
Outcome safe_decidability(const std::vector<CorpusEntry>& corpus) {
  const auto t0 = Clock::now();
  std::size_t n = 0, unknown = 0;
  for (const auto& e : corpus) {
    if (e.mode != Mode::SafeWhileF || !e.terminating) continue;
    ++n;
    Bounds b = bounds_of(e);
    b.max_steps = 10'000;
    b.max_states = 1'000'000;
    if (kind_of(explore(initial_of(e), b, options_of(e))) == VerdictKind::Unknown) ++unknown;
  }
  const double secs = seconds_since(t0);
  return {unknown == 0 && n > 0 && secs < 60.0,
          std::to_string(n) + " programs, " + std::to_string(unknown) + " unknown, " + fmt_seconds(secs)};
}

// 7. BFS explorer and the recursive oracle agree on the verdict kind.
Outcome oracle_equivalence(const std::vector<CorpusEntry>& corpus) {
  std::size_t compared = 0, disagreements = 0;
  std::string bad;
  for (const auto& e : corpus) {
    const Configuration c0 = initial_of(e);
    ++compared;
    if (kind_of(explore(c0, bounds_of(e), options_of(e))) != kind_of(oracle_explore(c0, bounds_of(e), options_of(e)))) {
      ++disagreements;
      bad += " " + e.name;
    }
  }
  std::map<VerdictKind, std::size_t> mix;
  Rng rng(77);
  for (std::size_t i = 0; i < 500; ++i) {
    const Mode mode = coin(rng, 50) ? Mode::WhileF : Mode::SafeWhileF;
    SmallGen gen{rng, mode};
    const Configuration c0 = gen.config();
    Bounds b;
    b.forkfor_max = static_cast<std::uint32_t>(pick(rng, 3));
    const StepOptions opts{coin(rng, 50) ? ReadMode::Oracle : ReadMode::Cursor, false};
    ++compared;
    const VerdictKind k = kind_of(explore(c0, b, opts));
    ++mix[k];
    if (k != kind_of(oracle_explore(c0, b, opts))) {
      ++disagreements;
      bad += " random#" + std::to_string(i);
    }
  }
  Outcome o{disagreements == 0,
            std::to_string(compared) + " programs (random: " + std::to_string(mix[VerdictKind::Safe]) + " safe, " +
                std::to_string(mix[VerdictKind::Unsafe]) + " unsafe, " + std::to_string(mix[VerdictKind::Unknown]) +
                " unknown), " + std::to_string(disagreements) + " disagreements"};
  if (!bad.empty()) o.detail += ":" + bad;
  return o;
}

// 8. Interleaving counts and contents for every shape with at most 8 atoms.
Outcome interleavings() {
  std::size_t shapes = 0, deviations = 0;
  for (std::size_t total = 1; total <= 8; ++total) {
    std::vector<std::vector<std::size_t>> all;
    std::vector<std::size_t> cur;
    shapes_with_total(total, cur, all);
    for (const auto& shape : all) {
      ++shapes;
      const auto got = enumerate_interleavings(std::span<const std::size_t>(shape));
      std::set<std::vector<std::pair<std::uint32_t, std::uint32_t>>> got_set;
      for (const auto& il : got) got_set.insert(il.order);
      if (got.size() != multinomial(shape) || got_set.size() != got.size() || got_set != brute_force_shuffles(shape))
        ++deviations;
    }
  }
  return {deviations == 0, std::to_string(shapes) + " shapes, " + std::to_string(deviations) + " deviations"};
}

// 9. The gadget is unsafe exactly when some reachable pointer falsifies the
// predicate.
Outcome gadget(const std::vector<CorpusEntry>& corpus) {
  const CorpusEntry& e = corpus_entry(corpus, "gadget");
  const std::string text = cli::read_text(corpus_path(e.file));
  const std::string marker = "y != 2";
  if (text.find(marker) == std::string::npos) return {false, "predicate marker missing from gadget program"};

  struct Pred {
    std::string text;
    std::function<bool(std::int64_t)> holds;
  };
  const std::vector<Pred> preds{
      {"y != 2", [](std::int64_t y) { return y != 2; }},
      {"y != 0", [](std::int64_t y) { return y != 0; }},
      {"y < 3", [](std::int64_t y) { return y < 3; }},
      {"y <= 4", [](std::int64_t y) { return y <= 4; }},
      {"y != 4", [](std::int64_t y) { return y != 4; }},
      {"y >= 0", [](std::int64_t y) { return y >= 0; }},
      {"y == 1", [](std::int64_t y) { return y == 1; }},
  };
  std::size_t cases = 0, mismatches = 0, unsafe = 0;
  for (const auto& pred : preds) {
    std::string program = text;
    program.replace(program.find(marker), marker.size(), pred.text);
    for (std::size_t len = 0; len <= 4; ++len) {
      std::vector<std::int64_t> contents;
      for (std::size_t i = 0; i < len; ++i) contents.push_back(static_cast<std::int64_t>(3 * i + 4));
      // Hand enumeration: y keeps 0 when no copy runs; otherwise it holds the
      // pointer of some read, any position 0..len.
      bool expect_unsafe = !pred.holds(0);
      for (std::size_t n = 0; n <= len; ++n) expect_unsafe = expect_unsafe || !pred.holds(static_cast<std::int64_t>(n));
      const Configuration c0 = config_of(program, Mode::WhileF, {{"f", contents}});
      const Verdict v = explore(c0, bounds_of(e), {ReadMode::Oracle, false});
      ++cases;
      if (expect_unsafe) ++unsafe;
      if ((kind_of(v) == VerdictKind::Unsafe) != expect_unsafe || kind_of(v) == VerdictKind::Unknown) ++mismatches;
    }
  }
  return {mismatches == 0 && cases > 0,
          std::to_string(cases) + " predicate/length cases (" + std::to_string(unsafe) + " expected unsafe), " +
              std::to_string(mismatches) + " mismatches"};
}

// 10. Byte-identical JSON reports apart from the timing field.
Outcome reproducibility(const std::vector<CorpusEntry>& corpus) {
  const auto dir = std::filesystem::temp_directory_path() / "filesafe_acceptance";
  std::filesystem::create_directories(dir);
  std::size_t compared = 0, differing = 0;
  for (const auto& e : corpus) {
    std::string texts[2];
    for (int run = 0; run < 2; ++run) {
      const auto path = (dir / (e.name + "." + std::to_string(run) + ".json")).string();
      std::vector<std::string> args{"check", corpus_path(e.file), "--mode", e.mode == Mode::SafeWhileF ? "safe" : "whilef",
                                    "--read-mode", std::string(read_mode_name(e.read_mode)), "--forkfor-max",
                                    std::to_string(e.forkfor_max), "--json", path};
      if (e.fs) {
        args.push_back("--fs");
        args.push_back(corpus_path(*e.fs));
      }
      std::ostringstream out, err;
      cli::run_cli(args, out, err);
      json doc = json::parse(cli::read_text(path));
      doc.erase("wall_time_ms");
      texts[run] = doc.dump(2);
    }
    ++compared;
    if (texts[0] != texts[1]) ++differing;
  }
  std::filesystem::remove_all(dir);
  return {differing == 0 && compared > 0,
          std::to_string(compared) + " programs checked twice, " + std::to_string(differing) + " differing reports"};
}

}  // namespace

int main() {
  const std::vector<CorpusEntry> corpus = load_manifest();
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"rule coverage", [&] { return rule_coverage(corpus); }},
      {"error-class detection", [&] { return error_classes(corpus); }},
      {"nondeterministic y", [&] { return nondeterminism(corpus); }},
      {"safe-mode determinism", [] { return safe_determinism(); }},
      {"safe-to-whilef embedding", [&] { return embedding(corpus); }},
      {"safe-mode decidability", [&] { return safe_decidability(corpus); }},
      {"oracle equivalence", [&] { return oracle_equivalence(corpus); }},
      {"interleaving counts", [] { return interleavings(); }},
      {"gadget behavior", [&] { return gadget(corpus); }},
      {"report reproducibility", [&] { return reproducibility(corpus); }},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& ex) {
      o = {false, std::string("exception: ") + ex.what()};
    }
    if (!o.pass) ++failed;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  AC" << (i + 1) << " " << criteria[i].first << ": " << o.detail
              << std::endl;
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size() << " criteria passed"
            << std::endl;
  return failed == 0 ? 0 : 1;
}
