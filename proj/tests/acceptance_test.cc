// Copyright 2026 The Cynical Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cynical/cynical.hpp"
#include "oracle.hpp"
#include "synthetic.hpp"

namespace cynical {
namespace {

using Lines = std::vector<std::string>;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

// A selection run kept as JADED bytes plus its events.
struct RunOutput {
  std::string jaded;
  std::vector<SelectionEvent> events;
  RunSummary summary;
  double seconds = 0.0;  // prepare + run
};

RunOutput select_run(const CorpusStats& repr, const Lines& avail,
                     const Lines& seed, const SelectOptions& opts) {
  RunOutput out;
  const auto start = Clock::now();
  auto sel = prepare_selection(repr, std::nullopt, avail, seed, opts);
  std::ostringstream jaded;
  out.summary = run(sel.engine, opts.stop, opts.mode, [&](const SelectionEvent& e) {
    jaded << format_jaded_row(e, avail[e.sentence_id], opts.log_base) << '\n';
    out.events.push_back(e);
  });
  out.seconds = seconds_since(start);
  out.jaded = jaded.str();
  return out;
}

// Scenario name -> whether two runs gave identical JADED bytes.
std::map<std::string, bool> g_determinism;

RunOutput select_twice(const std::string& scenario, const CorpusStats& repr,
                       const Lines& avail, const Lines& seed,
                       const SelectOptions& opts) {
  RunOutput a = select_run(repr, avail, seed, opts);
  RunOutput b = select_run(repr, avail, seed, opts);
  g_determinism[scenario] = a.jaded == b.jaded;
  a.seconds = std::min(a.seconds, b.seconds);
  return a;
}

std::vector<std::string> squashed_tokens(const std::string& line,
                                         const VocabPartition& p) {
  std::vector<std::string> out;
  for_each_escaped_token(line, [&](std::string_view t) {
    out.push_back(std::string(squash_token(t, p)));
  });
  return out;
}

std::map<std::string, double> squashed_p(const CorpusStats& repr,
                                         const VocabPartition& p) {
  const CorpusStats s = squash_stats(repr, p);
  std::map<std::string, double> out;
  for (const auto& [w, n] : s.counts()) {
    out[w] = static_cast<double>(n) / static_cast<double>(s.total_tokens());
  }
  return out;
}

// ---------------------------------------------------------------------------

Outcome decomposition_identity() {
  synthetic::Rng rng(1001);
  const auto start = Clock::now();
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng.below(50);
    std::vector<double> p(n);
    double total = 0.0;
    for (double& x : p) total += (x = rng.uniform());
    for (double& x : p) x /= total;

    ModelState state(n, kDefaultDelta, p);
    Bag prior;
    for (TypeId v = 0; v < n; ++v) {
      const auto c = static_cast<std::uint32_t>(rng.below(101));
      if (c) prior.push_back({v, c});
    }
    state.prime(prior);
    state.recompute_entropy(p);

    std::vector<TypeId> ids(1 + rng.below(20));
    for (auto& t : ids) t = static_cast<TypeId>(rng.below(n));
    const Bag bag = make_bag(ids);
    const double dh = delta_h(state, bag, ids.size(), p).delta_h;

    std::map<std::string, double> pm;
    oracle::Model m;
    for (TypeId v = 0; v < n; ++v) pm["t" + std::to_string(v)] = p[v];
    for (const auto& [v, c] : prior) m.counts["t" + std::to_string(v)] = c;
    m.tokens = state.tokens();
    std::vector<std::string> tokens;
    for (TypeId t : ids) tokens.push_back("t" + std::to_string(t));
    const double direct =
        oracle::cross_entropy(pm, oracle::with_sentence(m, tokens), kDefaultDelta, n) -
        oracle::cross_entropy(pm, m, kDefaultDelta, n);
    worst = std::max(worst, std::abs(dh - direct));
  }
  const double secs = seconds_since(start);
  return {worst <= 1e-9 && secs < 1.0,
          fmt("1000 pairs, max |err| %.3g bits, %.3f s", worst, secs)};
}

Outcome oracle_equivalence() {
  synthetic::Rng rng(2002);
  double engine_secs = 0.0;
  int mismatches = 0;
  std::size_t steps_checked = 0;
  std::string first_bad;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n_vocab = 5 + rng.below(96);
    const auto word = [&] {
      const double u = rng.uniform();
      return "w" + std::to_string(static_cast<std::size_t>(u * u * n_vocab));
    };
    Lines repr_lines;
    std::size_t repr_tokens = 0;
    const std::size_t repr_budget = 20 + rng.below(981);
    while (repr_tokens < repr_budget) {
      std::string l;
      for (std::size_t i = 0, k = std::min<std::size_t>(1 + rng.below(10),
                                                        repr_budget - repr_tokens);
           i < k; ++i, ++repr_tokens) {
        l += word() + ' ';
      }
      repr_lines.push_back(l);
    }
    Lines avail(1 + rng.below(200));
    for (auto& l : avail) {
      for (std::size_t i = 0, k = 1 + rng.below(12); i < k; ++i) l += word() + ' ';
    }

    SelectOptions opts;
    opts.mode = Mode::kExact;
    opts.stop.exhaustive = true;
    opts.squash.min_count = 1 + rng.below(3);
    opts.squash.ratio_hi = 1.5 + rng.uniform() * 2.0;
    const CorpusStats repr = count_escaped(repr_lines);
    const RunOutput got =
        select_twice("oracle instance " + std::to_string(trial), repr, avail, {}, opts);
    engine_secs += got.seconds;

    const auto partition = partition_vocab(repr, count_escaped(avail),
                                           count_escaped(avail).vocabulary(),
                                           opts.squash);
    std::vector<std::pair<std::uint64_t, std::vector<std::string>>> candidates;
    for (std::size_t i = 0; i < avail.size(); ++i) {
      candidates.push_back({i, squashed_tokens(avail[i], partition)});
    }
    const auto want = oracle::greedy_sequence(candidates, squashed_p(repr, partition),
                                              {}, kDefaultDelta,
                                              partition.kept().size() + 5);
    bool ok = want.size() == got.events.size();
    for (std::size_t i = 0; ok && i < want.size(); ++i) {
      ok = want[i].id == got.events[i].sentence_id &&
           std::abs(want[i].delta_h - got.events[i].delta_h) <= 1e-9;
    }
    steps_checked += want.size();
    if (!ok) {
      ++mismatches;
      if (first_bad.empty()) {
        std::size_t i = 0;
        while (i < want.size() && i < got.events.size() &&
               want[i].id == got.events[i].sentence_id) {
          ++i;
        }
        first_bad = fmt("; first mismatch: instance %d step %zu", trial, i);
      }
    }
  }
  return {mismatches == 0 && engine_secs < 30.0,
          fmt("100 instances, %zu steps, %d mismatches, %.2f s", steps_checked,
              mismatches, engine_secs) +
              first_bad};
}

Outcome telescoping() {
  synthetic::World world;
  synthetic::Rng rng(3003);
  const Lines repr_lines = world.in_domain.lines(rng, 3000);
  const Lines seed = world.in_domain.lines(rng, 200);
  const Lines avail = world.mixture(rng, 2000, 8000);
  const CorpusStats repr = count_escaped(repr_lines);
  SelectOptions opts;
  opts.mode = Mode::kFast;
  opts.stop.exhaustive = true;
  const RunOutput got = select_twice("telescoping", repr, avail, seed, opts);
  if (got.events.empty()) return {false, "no selections"};

  const auto partition =
      partition_vocab(repr, count_escaped(avail), count_escaped(avail).vocabulary(),
                      opts.squash, count_escaped(seed).vocabulary());
  oracle::Model m;
  for (const Lines* src : {&seed}) {
    for (const auto& l : *src) m = oracle::with_sentence(m, squashed_tokens(l, partition));
  }
  for (const auto& e : got.events) {
    m = oracle::with_sentence(m, squashed_tokens(avail[e.sentence_id], partition));
  }
  const double direct = oracle::cross_entropy(squashed_p(repr, partition), m,
                                              kDefaultDelta, partition.kept().size() + 5);
  const double err = std::abs(direct - got.events.back().h_after);
  return {err <= 1e-6, fmt("%zu of %zu lines selected, |h_after - direct| = %.3g bits",
                           got.events.size(), avail.size(), err)};
}

Outcome degenerate_contrast() {
  synthetic::World world;
  synthetic::Rng rng(4004);
  const Lines avail = world.mixture(rng, 250, 250);
  // REPR and the pool have one and the same distribution.
  const CorpusStats stats = count_escaped(avail);
  const auto ml = moore_lewis_rank(avail, stats, stats, kDefaultDelta);
  const bool all_zero = std::all_of(ml.begin(), ml.end(),
                                    [](const MooreLewisScore& s) { return s.score == 0.0; });

  SelectOptions opts;
  opts.mode = Mode::kExact;
  opts.stop.exhaustive = true;
  const RunOutput got = select_twice("degenerate contrast", stats, avail, {}, opts);
  std::set<double> distinct;
  std::set<std::uint64_t> ids;
  for (const auto& e : got.events) {
    distinct.insert(e.delta_h);
    ids.insert(e.sentence_id);
  }
  // A strict ranking: every line gets its own rank.
  const bool ranked = ids.size() == avail.size() && got.events.size() == avail.size();
  return {all_zero && distinct.size() > 1 && ranked,
          fmt("Moore-Lewis: %s over %zu lines; cynical: %zu distinct dH values over "
              "%zu ranked lines",
              all_zero ? "all 0.0" : "NOT all zero", ml.size(), distinct.size(),
              got.events.size())};
}

struct Coverage {
  std::size_t early = 0;      // covered within the 2|K| prefix
  std::size_t total = 0;      // covered by the end of the run
  std::size_t reachable = 0;  // |K|: KEPT words occurring in the pool
  double needed = 0.0;        // KEPT tokens to reach 90%, in units of |K|
};

Coverage coverage_of(const RunOutput& got, const Lines& avail,
                     const VocabPartition& partition) {
  // Squashing leaves KEPT words as they are and maps everything else to a
  // reserved token.
  std::set<std::string> reachable;
  for (const auto& l : avail) {
    for (const auto& t : squashed_tokens(l, partition)) {
      if (!is_reserved_token(t)) reachable.insert(t);
    }
  }
  Coverage c;
  c.reachable = reachable.size();
  std::set<std::string> seen;
  std::size_t kept_tokens = 0;
  bool in_prefix = true;
  for (const auto& e : got.events) {
    for (const auto& t : squashed_tokens(avail[e.sentence_id], partition)) {
      if (!reachable.contains(t)) continue;
      seen.insert(t);
      ++kept_tokens;
    }
    if (in_prefix && kept_tokens >= 2 * c.reachable) {
      c.early = seen.size();
      in_prefix = false;
    }
    if (c.needed == 0.0 && 10 * seen.size() >= 9 * c.reachable) {
      c.needed = static_cast<double>(kept_tokens) / static_cast<double>(c.reachable);
    }
  }
  if (in_prefix) c.early = seen.size();
  c.total = seen.size();
  return c;
}

Outcome coverage() {
  synthetic::World world;
  synthetic::Rng rng(5005);
  const Lines repr_lines = world.in_domain.lines(rng, 3000);
  const CorpusStats repr = count_escaped(repr_lines);
  struct Case {
    Mode mode;
    std::size_t n_in, n_out;
  };
  bool pass = true;
  std::string detail;
  for (const Case& c : {Case{Mode::kExact, 300, 1200}, Case{Mode::kFast, 2000, 18000}}) {
    const Lines avail = world.mixture(rng, c.n_in, c.n_out);
    SelectOptions opts;
    opts.mode = c.mode;
    opts.stop.exhaustive = true;
    const RunOutput got = select_twice(
        "coverage " + std::string(mode_name(c.mode)), repr, avail, {}, opts);
    const auto partition = partition_vocab(repr, count_escaped(avail),
                                           count_escaped(avail).vocabulary(), opts.squash);
    const Coverage cov = coverage_of(got, avail, partition);
    const double early = cov.reachable ? double(cov.early) / double(cov.reachable) : 1.0;
    pass = pass && cov.reachable > 0 && early >= 0.9 && cov.total == cov.reachable;
    detail += fmt("%s%s: %.1f%% of %zu KEPT in 2|K| prefix (90%% after %.1f|K|), "
                  "%zu/%zu at end",
                  detail.empty() ? "" : "; ", std::string(mode_name(c.mode)).c_str(),
                  100.0 * early, cov.reachable, cov.needed, cov.total, cov.reachable);
  }
  return {pass, detail};
}

std::uint64_t oov_tokens(const Lines& subset, const CorpusStats& repr) {
  return evaluate_subset(subset, repr, kDefaultDelta).oov_tokens;
}

Outcome directional_oov() {
  synthetic::World world;
  synthetic::Rng rng(6006);
  const Lines repr_lines = world.in_domain.lines(rng, 5000);
  const Lines avail = world.mixture(rng, 10000, 90000);
  const CorpusStats repr = count_escaped(repr_lines);
  SelectOptions opts;
  opts.mode = Mode::kFast;
  const RunOutput got = select_twice("directional oov", repr, avail, {}, opts);
  Lines cynical_subset;
  for (const auto& e : got.events) cynical_subset.push_back(avail[e.sentence_id]);

  const auto ml = moore_lewis_rank(avail, repr, count_escaped(avail), kDefaultDelta);
  Lines ml_subset;
  for (std::size_t i = 0; i < cynical_subset.size() && i < ml.size(); ++i) {
    ml_subset.push_back(avail[ml[i].id]);
  }
  const auto a = oov_tokens(cynical_subset, repr);
  const auto b = oov_tokens(ml_subset, repr);
  return {!cynical_subset.empty() && a <= b,
          fmt("%zu lines each: cynical %llu OOV tokens, Moore-Lewis %llu (of %llu)",
              cynical_subset.size(), static_cast<unsigned long long>(a),
              static_cast<unsigned long long>(b),
              static_cast<unsigned long long>(repr.total_tokens()))};
}

Outcome stopping() {
  SelectOptions opts;
  opts.mode = Mode::kExact;
  opts.squash.min_count = 1;
  const RunOutput tiny = select_twice("three-line instance", count_escaped(Lines{"x x y"}),
                                      Lines{"x", "y", "z z z"}, {}, opts);
  const bool tiny_ok = tiny.events.size() == 2 &&
                       tiny.summary.reason == StopReason::kDeltaHPositive;

  // The stopping rule on a larger run: every stretch of positive rows is
  // shorter than the patience window and is followed by a non-positive row.
  synthetic::World world;
  synthetic::Rng rng(7007);
  const CorpusStats repr = count_escaped(world.in_domain.lines(rng, 2000));
  const Lines avail = world.mixture(rng, 1000, 9000);
  SelectOptions fast;
  fast.mode = Mode::kFast;
  const RunOutput got = select_twice("stopping synthetic", repr, avail, {}, fast);
  std::size_t streak = 0;
  std::size_t longest = 0;
  for (const auto& e : got.events) {
    streak = e.delta_h > 0.0 ? streak + 1 : 0;
    longest = std::max(longest, streak);
  }
  const bool big_ok = !got.events.empty() && streak == 0 &&
                      longest < fast.stop.patience &&
                      got.summary.reason == StopReason::kDeltaHPositive;
  return {tiny_ok && big_ok,
          fmt("3-line instance: %zu rows, stop=%s; synthetic: %zu rows, longest "
              "positive stretch %zu, trailing %zu, stop=%s",
              tiny.events.size(), std::string(stop_reason_name(tiny.summary.reason)).c_str(),
              got.events.size(), longest, streak,
              std::string(stop_reason_name(got.summary.reason)).c_str())};
}

struct BatchRun {
  std::string jaded;
  std::size_t batches = 0;
  std::size_t size_errors = 0;
  std::size_t intra_dups = 0;
  std::size_t returned = 0;
  std::set<std::uint64_t> dup_batches;  // batch index of each selected copy
  std::size_t dup_selected = 0;
};

BatchRun batch_run(const CorpusStats& repr, const Lines& avail,
                   const std::string& dup) {
  SelectOptions opts;
  opts.mode = Mode::kBatch;
  auto sel = prepare_selection(repr, std::nullopt, avail, {}, opts);
  Engine& engine = sel.engine;
  BatchRun r;
  std::ostringstream jaded;
  while (const auto v = engine.best_word()) {
    // A counted from scratch: live sentences containing the trigger word.
    std::size_t alive = 0;
    for (std::uint32_t s = 0; s < engine.sentences().size(); ++s) {
      if (!engine.is_alive_slot(s)) continue;
      for (const auto& tc : engine.sentences()[s].bag) alive += tc.type == *v;
    }
    const auto events = engine.select_batch();
    if (events.empty()) break;
    ++r.batches;
    const BatchInfo& b = engine.last_batch();
    if (b.trigger != *v || b.alive != alive || b.rescored != ceil_sqrt(alive) ||
        b.planned != ceil_half_sqrt(alive) ||
        b.selected + b.returned != b.planned || events.size() != b.selected) {
      ++r.size_errors;
    }
    r.returned += b.returned;
    std::set<std::string> texts;
    for (const auto& e : events) {
      const std::string& text = avail[e.sentence_id];
      if (!texts.insert(text).second) ++r.intra_dups;
      if (text == dup) {
        ++r.dup_selected;
        r.dup_batches.insert(e.batch_index);
      }
      jaded << format_jaded_row(e, text) << '\n';
    }
  }
  r.jaded = jaded.str();
  return r;
}

Outcome batch_contract() {
  synthetic::World world;
  synthetic::Rng rng(8008);
  const CorpusStats repr = count_escaped(world.in_domain.lines(rng, 2000));
  Lines avail = world.mixture(rng, 600, 2400);
  const std::string dup = "in0 in1 in2 in3 com0 com1";
  for (int i = 0; i < 20; ++i) {
    avail.insert(avail.begin() + static_cast<std::ptrdiff_t>(150 * i + 7), dup);
  }
  const BatchRun a = batch_run(repr, avail, dup);
  const BatchRun b = batch_run(repr, avail, dup);
  g_determinism["batch contract"] = a.jaded == b.jaded;
  const bool pass = a.batches > 0 && a.size_errors == 0 && a.intra_dups == 0 &&
                    a.dup_selected == 20 && a.dup_batches.size() == 20 &&
                    a.returned > 0;
  return {pass, fmt("%zu batches, %zu size mismatches, %zu intra-batch duplicates, "
                    "20 copies -> %zu selected in %zu distinct batches, %zu returned",
                    a.batches, a.size_errors, a.intra_dups, a.dup_selected,
                    a.dup_batches.size(), a.returned)};
}

Outcome scaling() {
  constexpr std::size_t kN = 50000;
  synthetic::World world;
  synthetic::Rng rng(9009);
  const CorpusStats repr = count_escaped(world.in_domain.lines(rng, 20000));
  const Lines small = world.mixture(rng, kN / 10, kN - kN / 10);
  const Lines large = world.mixture(rng, 8 * kN / 10, 8 * kN - 8 * kN / 10);
  bool pass = true;
  std::string detail;
  for (const auto& [mode, envelope] :
       {std::pair{Mode::kFast, 40.0}, std::pair{Mode::kBatch, 24.0}}) {
    SelectOptions opts;
    opts.mode = mode;
    const std::string name(mode_name(mode));
    const RunOutput a = select_twice("scaling " + name + " N", repr, small, {}, opts);
    const RunOutput b = select_twice("scaling " + name + " 8N", repr, large, {}, opts);
    const double ratio = b.seconds / a.seconds;
    pass = pass && ratio <= envelope;
    detail += fmt("%s%s: N %.2f s (%zu rows), 8N %.2f s (%zu rows), ratio %.1f (<= %.0f)",
                  detail.empty() ? "" : "; ", name.c_str(), a.seconds, a.events.size(),
                  b.seconds, b.events.size(), ratio, envelope);
  }
  return {pass, detail};
}

Outcome determinism() {
  std::size_t same = 0;
  std::string differing;
  for (const auto& [name, ok] : g_determinism) {
    if (ok) {
      ++same;
    } else {
      differing += differing.empty() ? " differing: " : ", ";
      differing += name;
    }
  }
  return {!g_determinism.empty() && same == g_determinism.size(),
          fmt("%zu/%zu scenarios byte-identical", same, g_determinism.size()) +
              differing};
}

}  // namespace
}  // namespace cynical

int main() {
  using namespace cynical;
  struct Criterion {
    const char* name;
    Outcome (*fn)();
  };
  const Criterion criteria[] = {
      {"decomposition identity", decomposition_identity},
      {"oracle equivalence", oracle_equivalence},
      {"telescoping", telescoping},
      {"degenerate-distribution contrast", degenerate_contrast},
      {"coverage", coverage},
      {"directional OOV", directional_oov},
      {"stopping", stopping},
      {"batch-mode contract", batch_contract},
      {"scaling", scaling},
      {"determinism", determinism},
  };
  int failed = 0;
  int index = 0;
  for (const auto& c : criteria) {
    ++index;
    Outcome o;
    const auto start = Clock::now();
    try {
      o = c.fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s  %2d %-34s %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", index,
                c.name, o.detail.c_str(), seconds_since(start));
    std::fflush(stdout);
    failed += !o.pass;
  }
  std::printf("%d of %d criteria passed\n", index - failed, index);
  return failed == 0 ? 0 : 1;
}
