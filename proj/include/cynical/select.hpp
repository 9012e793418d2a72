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

// Greedy sentence selection.
//
// Three strategies share one engine and one objective:
//
//   exact  Scores every remaining sentence each step and takes the global
//          argmin of dH. Quadratic; meant for small inputs and as an oracle.
//
//   fast   Picks the KEPT word with the best estimated gain, then looks only
//          at sentences containing it. Each word keeps a list of its
//          sentences sorted by a cached gain. Gains only grow (become less
//          negative) as the selected corpus grows, so a cached gain is a
//          lower bound on the current one: after rescoring the head of the
//          list, only entries cached below its new gain can beat it.
//          Selected sentences are removed from the trigger word's list only;
//          their entries elsewhere become ghosts that are dropped when next
//          seen.
//
//   batch  Like fast, but rescores the top ceil(sqrt(A)) entries of the
//          trigger word's list (A = live entries) and takes the best
//          ceil(sqrt(A)/2) of them at once, skipping repeated copies of the
//          same text within one batch.
//
// Ties are broken by lowest sentence id, and between words by byte-wise
// word order, so runs are deterministic.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "cynical/corpus.hpp"
#include "cynical/error.hpp"
#include "cynical/score.hpp"
#include "cynical/squash.hpp"

namespace cynical {

enum class Mode { kExact, kFast, kBatch };

inline std::string_view mode_name(Mode m) {
  switch (m) {
    case Mode::kExact:
      return "exact";
    case Mode::kFast:
      return "fast";
    case Mode::kBatch:
      return "batch";
  }
  return "?";
}

inline constexpr std::string_view kExactTrigger = "exact";

struct SelectionEvent {
  std::uint64_t iteration = 0;    // 1-based, strictly increasing
  std::uint64_t batch_index = 0;  // 0 outside batch mode
  std::uint64_t sentence_id = 0;
  std::string trigger_word;
  double penalty = 0.0;
  double gain = 0.0;
  double delta_h = 0.0;
  double h_after = 0.0;
  std::uint64_t token_count = 0;
};

// Bookkeeping for the most recent batch.
struct BatchInfo {
  std::uint64_t batch_index = 0;
  TypeId trigger = 0;
  std::size_t alive = 0;     // A: live entries in the trigger word's list
  std::size_t rescored = 0;  // ceil(sqrt(A))
  std::size_t planned = 0;   // ceil(sqrt(A) / 2)
  std::size_t selected = 0;
  std::size_t returned = 0;  // duplicates put back on the list
};

// Smallest k with k * k >= a.
inline std::size_t ceil_sqrt(std::size_t a) {
  auto k = static_cast<std::size_t>(std::sqrt(static_cast<double>(a)));
  while (k * k < a) ++k;
  while (k > 0 && (k - 1) * (k - 1) >= a) --k;
  return k;
}

// ceil(sqrt(a) / 2): smallest m with 4 m^2 >= a.
inline std::size_t ceil_half_sqrt(std::size_t a) {
  auto m = ceil_sqrt(a) / 2;
  while (4 * m * m < a) ++m;
  return m;
}

struct EngineOptions {
  double delta = kDefaultDelta;
  // Fast and batch modes need at least one KEPT word in the pool.
  bool require_kept = true;
};

class Engine {
 public:
  struct Entry {
    double key;          // cached gain, a lower bound on the current gain
    std::uint32_t slot;  // index into sentences(); ordered like ids
  };

  struct Pick {
    std::uint32_t slot;
    ScoreBreakdown score;
  };

  Engine(ScoringVocab vocab, std::vector<SentenceRecord> sentences,
         std::span<const Bag> seed, const EngineOptions& opts)
      : vocab_(std::move(vocab)),
        state_(vocab_.size(), opts.delta, vocab_.p_repr()),
        sentences_(std::move(sentences)),
        alive_(sentences_.size(), 1),
        lists_(vocab_.kept_size()),
        word_key_(vocab_.kept_size(), 0.0),
        ranked_(vocab_.kept_size(), 0) {
    if (sentences_.empty()) {
      throw NothingSelectable("available corpus has no non-blank lines");
    }
    for (std::size_t i = 1; i < sentences_.size(); ++i) {
      if (sentences_[i].id <= sentences_[i - 1].id) {
        throw ContractError("sentence ids must be strictly increasing");
      }
    }
    for (const Bag& bag : seed) state_.prime(bag);
    state_.recompute_entropy(vocab_.p_repr());

    for (std::uint32_t slot = 0; slot < sentences_.size(); ++slot) {
      SentenceRecord& s = sentences_[slot];
      s.cached_gain = sentence_gain(state_, s.bag, p_repr());
      s.cached_at = 0;
      for (const auto& [v, c] : s.bag) {
        if (vocab_.is_kept(v)) list(v).entries.push_back({s.cached_gain, slot});
      }
    }
    bool any = false;
    for (TypeId k = 0; k < lists_.size(); ++k) {
      auto& entries = lists_[k].entries;
      if (entries.empty()) continue;
      any = true;
      std::sort(entries.begin(), entries.end(), before);
      rank(k + ScoringVocab::kFirstKept);
    }
    if (!any && opts.require_kept) {
      throw NothingSelectable(
          "nothing selectable: no KEPT word occurs in the available corpus");
    }
  }

  const ScoringVocab& vocab() const { return vocab_; }
  const ModelState& state() const { return state_; }
  std::span<const double> p_repr() const { return vocab_.p_repr(); }
  const std::vector<SentenceRecord>& sentences() const { return sentences_; }
  std::uint64_t iteration() const { return iteration_; }
  std::uint64_t rescore_count() const { return rescores_; }
  const BatchInfo& last_batch() const { return last_batch_; }

  bool is_alive_slot(std::uint32_t slot) const { return alive_[slot] != 0; }
  std::optional<std::uint32_t> slot_of(std::uint64_t id) const {
    auto it = std::lower_bound(
        sentences_.begin(), sentences_.end(), id,
        [](const SentenceRecord& s, std::uint64_t x) { return s.id < x; });
    if (it == sentences_.end() || it->id != id) return std::nullopt;
    return static_cast<std::uint32_t>(it - sentences_.begin());
  }

  // Entries of a KEPT word's list from the head, ghosts included.
  std::vector<Entry> word_list(TypeId v) const {
    const WordList& l = lists_.at(v - ScoringVocab::kFirstKept);
    return {l.entries.begin() + static_cast<std::ptrdiff_t>(l.head),
            l.entries.end()};
  }

  // KEPT word with the best (lowest) estimated gain whose list still holds a
  // live sentence. Words with exhausted lists are dropped for good.
  std::optional<TypeId> best_word() {
    while (!ranking_.empty()) {
      const TypeId v = ranking_.begin()->second;
      WordList& l = list(v);
      prune_head(l);
      if (l.head < l.entries.size()) return v;
      unrank(v);
    }
    return std::nullopt;
  }

  // Lazily rescores the head region of v's list and returns the best
  // freshly-scored candidate by dH. The list is left sorted.
  std::optional<Pick> lazy_top(TypeId v) {
    WordList& l = list(v);
    prune_head(l);
    auto& e = l.entries;
    if (l.head == e.size()) return std::nullopt;

    scratch_.clear();
    const std::uint32_t head_slot = e[l.head].slot;
    const ScoreBreakdown head_score = rescore(head_slot);
    const Entry fresh_head{head_score.gain, head_slot};
    scratch_.push_back({head_slot, head_score});

    std::size_t end = l.head + 1;
    for (; end < e.size(); ++end) {
      const Entry& x = e[end];
      if (!alive_[x.slot]) continue;
      if (!before(x, fresh_head)) break;
      scratch_.push_back({x.slot, rescore(x.slot)});
    }
    rewrite_region(l, end);

    const Pick* best = &scratch_.front();
    for (const Pick& p : scratch_) {
      if (p.score.delta_h < best->score.delta_h ||
          (p.score.delta_h == best->score.delta_h && p.slot < best->slot)) {
        best = &p;
      }
    }
    return *best;
  }

  std::optional<SelectionEvent> select_next() {
    while (const auto v = best_word()) {
      const auto pick = lazy_top(*v);
      if (!pick) {
        unrank(*v);
        continue;
      }
      take(list(*v), pick->slot);
      return commit(pick->slot, pick->score, vocab_.name(*v), 0);
    }
    return std::nullopt;
  }

  std::optional<SelectionEvent> exact_select_next() {
    std::optional<Pick> best;
    for (std::uint32_t slot = 0; slot < sentences_.size(); ++slot) {
      if (!alive_[slot]) continue;
      const ScoreBreakdown b = delta_h(state_, sentences_[slot], p_repr());
      if (!best || b.delta_h < best->score.delta_h) best = Pick{slot, b};
    }
    if (!best) return std::nullopt;
    return commit(best->slot, best->score, std::string(kExactTrigger), 0);
  }

  // One batch; empty when no candidates remain.
  std::vector<SelectionEvent> select_batch() {
    while (const auto v = best_word()) {
      WordList& l = list(*v);
      compact(l);
      const std::size_t alive = l.entries.size();
      if (alive == 0) {
        unrank(*v);
        continue;
      }
      const std::size_t n_rescore = ceil_sqrt(alive);
      const std::size_t n_plan = ceil_half_sqrt(alive);

      scratch_.clear();
      for (std::size_t i = 0; i < n_rescore; ++i) {
        const std::uint32_t slot = l.entries[i].slot;
        scratch_.push_back({slot, rescore(slot)});
      }
      std::vector<Pick> order = scratch_;
      std::sort(order.begin(), order.end(), [](const Pick& a, const Pick& b) {
        if (a.score.delta_h != b.score.delta_h) {
          return a.score.delta_h < b.score.delta_h;
        }
        return a.slot < b.slot;
      });

      std::vector<std::uint32_t> chosen;
      std::unordered_set<std::uint32_t> groups;
      std::size_t returned = 0;
      for (std::size_t i = 0; i < n_plan; ++i) {
        if (groups.insert(sentences_[order[i].slot].dup_group).second) {
          chosen.push_back(order[i].slot);
        } else {
          ++returned;
        }
      }
      for (std::uint32_t slot : chosen) alive_[slot] = 0;
      rewrite_region(l, n_rescore);

      ++batches_;
      std::vector<SelectionEvent> events;
      events.reserve(chosen.size());
      for (std::uint32_t slot : chosen) {
        const ScoreBreakdown b = delta_h(state_, sentences_[slot], p_repr());
        events.push_back(commit(slot, b, vocab_.name(*v), batches_));
      }
      last_batch_ = {batches_, *v,      alive,          n_rescore,
                     n_plan,   chosen.size(), returned};
      return events;
    }
    return {};
  }

  // One step of the given strategy; empty when exhausted.
  std::vector<SelectionEvent> step(Mode mode) {
    std::optional<SelectionEvent> e;
    switch (mode) {
      case Mode::kExact:
        e = exact_select_next();
        break;
      case Mode::kFast:
        e = select_next();
        break;
      case Mode::kBatch:
        return select_batch();
    }
    if (!e) return {};
    return {std::move(*e)};
  }

 private:
  struct WordList {
    std::vector<Entry> entries;
    std::size_t head = 0;
  };

  static bool before(const Entry& a, const Entry& b) {
    return a.key < b.key || (a.key == b.key && a.slot < b.slot);
  }

  WordList& list(TypeId v) { return lists_[v - ScoringVocab::kFirstKept]; }

  void rank(TypeId v) {
    const std::size_t k = v - ScoringVocab::kFirstKept;
    word_key_[k] =
        word_gain_estimate(p_repr()[v], state_.count(v), state_.delta());
    ranking_.emplace(word_key_[k], v);
    ranked_[k] = 1;
  }

  void unrank(TypeId v) {
    const std::size_t k = v - ScoringVocab::kFirstKept;
    if (!ranked_[k]) return;
    ranking_.erase({word_key_[k], v});
    ranked_[k] = 0;
  }

  void prune_head(WordList& l) {
    while (l.head < l.entries.size() && !alive_[l.entries[l.head].slot]) {
      ++l.head;
    }
    if (l.head == l.entries.size()) {
      l.entries.clear();
      l.head = 0;
    } else if (l.head > 64 && l.head * 2 > l.entries.size()) {
      l.entries.erase(l.entries.begin(),
                      l.entries.begin() + static_cast<std::ptrdiff_t>(l.head));
      l.head = 0;
    }
  }

  // Drops every ghost; head becomes 0.
  void compact(WordList& l) {
    auto first = l.entries.begin() + static_cast<std::ptrdiff_t>(l.head);
    auto last = std::remove_if(first, l.entries.end(), [&](const Entry& x) {
      return !alive_[x.slot];
    });
    l.entries.erase(last, l.entries.end());
    l.entries.erase(l.entries.begin(), first);
    l.head = 0;
  }

  ScoreBreakdown rescore(std::uint32_t slot) {
    ++rescores_;
    SentenceRecord& s = sentences_[slot];
    const ScoreBreakdown b = delta_h(state_, s, p_repr());
    s.cached_gain = b.gain;
    s.cached_at = iteration_;
    return b;
  }

  // Rewrites entries [head, end), whose live members are exactly the
  // rescored ones in scratch_: ghosts and newly dead entries are dropped,
  // keys refreshed, and the region merged back into the sorted suffix.
  void rewrite_region(WordList& l, std::size_t end) {
    auto& e = l.entries;
    region_.clear();
    for (const Pick& p : scratch_) {
      if (alive_[p.slot]) region_.push_back({p.score.gain, p.slot});
    }
    std::sort(region_.begin(), region_.end(), before);
    const std::size_t start = end - region_.size();
    std::copy(region_.begin(), region_.end(),
              e.begin() + static_cast<std::ptrdiff_t>(start));
    l.head = start;
    if (region_.empty() || end == e.size()) return;
    const auto mid = e.begin() + static_cast<std::ptrdiff_t>(end);
    const auto stop = std::upper_bound(mid, e.end(), region_.back(), before);
    std::inplace_merge(e.begin() + static_cast<std::ptrdiff_t>(start), mid,
                       stop, before);
  }

  // Removes `slot` from the list (it sits near the head after lazy_top).
  void take(WordList& l, std::uint32_t slot) {
    auto first = l.entries.begin() + static_cast<std::ptrdiff_t>(l.head);
    auto it = std::find_if(first, l.entries.end(),
                           [&](const Entry& x) { return x.slot == slot; });
    if (it == l.entries.end()) return;
    std::rotate(first, it, it + 1);
    ++l.head;
  }

  SelectionEvent commit(std::uint32_t slot, const ScoreBreakdown& b,
                        std::string trigger, std::uint64_t batch) {
    const SentenceRecord& s = sentences_[slot];
    alive_[slot] = 0;
    update_state(state_, s, b);
    ++iteration_;
    for (const auto& [v, c] : s.bag) {
      if (!vocab_.is_kept(v) || !ranked_[v - ScoringVocab::kFirstKept]) {
        continue;
      }
      unrank(v);
      rank(v);
    }
    SelectionEvent ev;
    ev.iteration = iteration_;
    ev.batch_index = batch;
    ev.sentence_id = s.id;
    ev.trigger_word = std::move(trigger);
    ev.penalty = b.penalty;
    ev.gain = b.gain;
    ev.delta_h = b.delta_h;
    ev.h_after = state_.entropy();
    ev.token_count = s.token_count;
    return ev;
  }

  ScoringVocab vocab_;
  ModelState state_;
  std::vector<SentenceRecord> sentences_;
  std::vector<char> alive_;
  std::vector<WordList> lists_;
  std::set<std::pair<double, TypeId>> ranking_;
  std::vector<double> word_key_;
  std::vector<char> ranked_;
  std::vector<Pick> scratch_;
  std::vector<Entry> region_;
  std::uint64_t iteration_ = 0;
  std::uint64_t batches_ = 0;
  std::uint64_t rescores_ = 0;
  BatchInfo last_batch_;
};

// Squashes and interns the candidate and seed corpora and builds an engine.
// `repr` must already be escaped (see count_escaped / escape_stats).
inline Engine build_engine(std::span<const std::string> avail_lines,
                           std::span<const std::string> seed_lines,
                           const CorpusStats& repr,
                           const VocabPartition& partition,
                           const EngineOptions& opts = {}) {
  ScoringVocab vocab(partition, repr);
  std::vector<SentenceRecord> sentences;
  StringMap<std::uint32_t> groups;
  std::vector<TypeId> ids;
  std::string key;
  for (std::size_t i = 0; i < avail_lines.size(); ++i) {
    ids.clear();
    key.clear();
    for_each_escaped_token(avail_lines[i], [&](std::string_view t) {
      ids.push_back(vocab.encode(t));
      if (!key.empty()) key += ' ';
      key += t;
    });
    if (ids.empty()) continue;
    SentenceRecord s;
    s.id = i;
    s.bag = make_bag(ids);
    s.token_count = ids.size();
    s.dup_group =
        groups.try_emplace(key, static_cast<std::uint32_t>(groups.size()))
            .first->second;
    sentences.push_back(std::move(s));
  }
  std::vector<Bag> seed;
  for (const auto& line : seed_lines) {
    ids.clear();
    for_each_escaped_token(line,
                           [&](std::string_view t) { ids.push_back(vocab.encode(t)); });
    if (!ids.empty()) seed.push_back(make_bag(ids));
  }
  return Engine(std::move(vocab), std::move(sentences), seed, opts);
}

// ---------------------------------------------------------------------------
// Running to a stopping point.

struct StopConfig {
  // Consecutive positive-dH steps that end the run; they are then truncated
  // from the output.
  std::size_t patience = 10;
  std::optional<std::uint64_t> max_lines;
  std::optional<std::uint64_t> max_tokens;
  // Ignore the dH rule and run until the pool is exhausted or a cap is hit.
  bool exhaustive = false;

  void validate() const {
    if (patience < 1) throw ContractError("patience must be >= 1");
  }
};

enum class StopReason { kDeltaHPositive, kMaxLines, kMaxTokens, kExhausted };

inline std::string_view stop_reason_name(StopReason r) {
  switch (r) {
    case StopReason::kDeltaHPositive:
      return "delta-h positive";
    case StopReason::kMaxLines:
      return "max-lines";
    case StopReason::kMaxTokens:
      return "max-tokens";
    case StopReason::kExhausted:
      return "exhausted";
  }
  return "?";
}

struct RunSummary {
  std::uint64_t lines = 0;   // emitted
  std::uint64_t tokens = 0;  // emitted
  double h_bits = 0.0;       // h_after of the last emitted event
  StopReason reason = StopReason::kExhausted;
  std::uint64_t truncated = 0;  // selected, then dropped by the dH rule
};

// Selects until the stopping rule fires, calling `sink(event)` for every
// emitted event in order. The rule works on steps: one line in exact and
// fast modes, one batch in batch mode, judged by its net dH. Positive steps
// are held back until a non-positive one confirms them; `patience` positive
// steps in a row (or running out of candidates while holding some) end the
// run and discard them. Caps cut at the exact line and keep held events.
template <typename Sink>
RunSummary run(Engine& engine, const StopConfig& stop, Mode mode,
               Sink&& sink) {
  stop.validate();
  RunSummary summary;
  summary.h_bits = engine.state().entropy();
  std::vector<SelectionEvent> pending;
  std::size_t pending_steps = 0;
  std::uint64_t lines = 0;
  std::uint64_t tokens = 0;

  const auto emit = [&](const SelectionEvent& e) {
    sink(e);
    ++summary.lines;
    summary.tokens += e.token_count;
    summary.h_bits = e.h_after;
  };
  const auto flush = [&] {
    for (const auto& e : pending) emit(e);
    pending.clear();
    pending_steps = 0;
  };

  while (true) {
    std::vector<SelectionEvent> events = engine.step(mode);
    if (events.empty()) {
      if (!pending.empty()) {
        summary.truncated += pending.size();
        summary.reason = StopReason::kDeltaHPositive;
      } else {
        summary.reason = StopReason::kExhausted;
      }
      return summary;
    }

    // A cap that falls inside this step ends the run there.
    std::size_t take = events.size();
    std::optional<StopReason> capped;
    for (std::size_t i = 0; i < events.size(); ++i) {
      ++lines;
      tokens += events[i].token_count;
      if (stop.max_lines && lines >= *stop.max_lines) {
        capped = StopReason::kMaxLines;
      } else if (stop.max_tokens && tokens >= *stop.max_tokens) {
        capped = StopReason::kMaxTokens;
      }
      if (capped) {
        take = i + 1;
        break;
      }
    }
    events.resize(take);
    if (capped || stop.exhaustive) {
      flush();
      for (const auto& e : events) emit(e);
      if (capped) {
        summary.reason = *capped;
        return summary;
      }
      continue;
    }

    double net = 0.0;
    for (const auto& e : events) net += e.delta_h;
    if (net > 0.0) {
      for (auto& e : events) pending.push_back(std::move(e));
      if (++pending_steps >= stop.patience) {
        summary.truncated += pending.size();
        summary.reason = StopReason::kDeltaHPositive;
        return summary;
      }
    } else {
      flush();
      for (const auto& e : events) emit(e);
    }
  }
}

}  // namespace cynical
