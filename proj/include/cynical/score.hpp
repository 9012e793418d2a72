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

// Entropy arithmetic for greedy selection.
//
// The selected corpus is modelled by a unigram distribution smoothed with a
// constant delta per vocabulary type,
//
//   Q_n(v) = (C_n(v) + delta) / (W_n + delta * |V|),
//
// and scored by the cross-entropy of the representative distribution P
// under it:
//
//   H_n = -sum_v P(v) log2 Q_n(v).
//
// Adding a sentence with w tokens and per-type counts c(v) changes H by
//
//   dH = log2((W_n + delta|V| + w) / (W_n + delta|V|))         penalty >= 0
//      + sum_v P(v) log2((C_n(v) + delta) / (C_n(v) + delta + c(v)))
//                                                             gain <= 0
//
// which holds exactly because P sums to one. All values are in bits.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "cynical/corpus.hpp"
#include "cynical/error.hpp"

namespace cynical {

inline constexpr double kDefaultDelta = 0.001;

// log2(1 + x), accurate for small x.
inline double log2_1p(double x) { return std::log1p(x) / std::numbers::ln2; }

// Bits added by growing the selected corpus from W_n to W_n + w tokens.
// `smoothing_mass` is delta * |V|.
inline double penalty(std::uint64_t sel_tokens, std::int64_t w,
                      double smoothing_mass) {
  if (w < 0) throw ContractError("penalty: negative token count");
  const double denom = static_cast<double>(sel_tokens) + smoothing_mass;
  if (!(denom > 0.0)) {
    throw ContractError("penalty: empty model without smoothing");
  }
  if (w == 0) return 0.0;
  return log2_1p(static_cast<double>(w) / denom);
}

// Contribution of one word type seen `c` times in the candidate.
inline double word_gain(double p_repr, std::uint64_t sel_count,
                        std::uint64_t c, double delta) {
  if (c == 0 || p_repr == 0.0) return 0.0;
  const double base = static_cast<double>(sel_count) + delta;
  return -p_repr * log2_1p(static_cast<double>(c) / base);
}

// word_gain with c = 1. An upper bound on word_gain for any c >= 1.
inline double word_gain_estimate(double p_repr, std::uint64_t sel_count,
                                 double delta) {
  return word_gain(p_repr, sel_count, 1, delta);
}

struct ScoreBreakdown;

class ModelState {
 public:
  // Starts from an empty selected corpus over `vocab_size` types; entropy()
  // is finite because of smoothing.
  ModelState(std::size_t vocab_size, double delta,
             std::span<const double> p_repr)
      : counts_(vocab_size, 0), delta_(delta) {
    if (!(delta > 0.0)) throw ContractError("delta must be > 0");
    if (vocab_size == 0) throw ContractError("empty scoring vocabulary");
    if (p_repr.size() != vocab_size) {
      throw ContractError("p_repr size does not match vocabulary");
    }
    recompute_entropy(p_repr);
  }

  std::uint64_t count(TypeId v) const { return counts_[v]; }
  std::span<const std::uint64_t> counts() const { return counts_; }
  std::uint64_t tokens() const { return tokens_; }
  double delta() const { return delta_; }
  std::size_t vocab_size() const { return counts_.size(); }
  double smoothing_mass() const {
    return delta_ * static_cast<double>(counts_.size());
  }
  // H_n in bits.
  double entropy() const { return entropy_; }
  // Number of non-empty updates applied; stamps ScoreBreakdowns.
  std::uint64_t version() const { return version_; }

  double smoothed_prob(TypeId v) const {
    return (static_cast<double>(counts_[v]) + delta_) /
           (static_cast<double>(tokens_) + smoothing_mass());
  }

  // Adds counts without touching the entropy bookkeeping; used to prime the
  // state from a seed corpus before recompute_entropy().
  void prime(const Bag& bag) {
    for (const auto& [v, c] : bag) {
      counts_.at(v) += c;
      tokens_ += c;
    }
    ++version_;
  }

  void recompute_entropy(std::span<const double> p_repr);

 private:
  friend void update_state(ModelState&, const Bag&, std::uint64_t,
                           const ScoreBreakdown&);

  std::vector<std::uint64_t> counts_;
  std::uint64_t tokens_ = 0;
  double delta_;
  double entropy_ = 0.0;
  std::uint64_t version_ = 0;
};

struct ScoreBreakdown {
  double penalty = 0.0;  // >= 0
  double gain = 0.0;     // <= 0
  double delta_h = 0.0;  // penalty + gain
  std::uint64_t state_version = 0;
};

// Direct evaluation of H for `state`, independent of its running entropy.
inline double cross_entropy(const ModelState& state,
                            std::span<const double> p_repr) {
  const double log_denom =
      std::log2(static_cast<double>(state.tokens()) + state.smoothing_mass());
  double h = 0.0;
  for (std::size_t v = 0; v < p_repr.size(); ++v) {
    if (p_repr[v] == 0.0) continue;
    h += p_repr[v] *
         (log_denom -
          std::log2(static_cast<double>(state.count(static_cast<TypeId>(v))) +
                    state.delta()));
  }
  return h;
}

inline void ModelState::recompute_entropy(std::span<const double> p_repr) {
  entropy_ = cross_entropy(*this, p_repr);
}

// Sum of word gains over the distinct types of a sentence. Terms are added
// in sorted order so that sentences with equal multisets of terms get
// bit-identical sums and fall through to the id tie-break.
inline double sentence_gain(const ModelState& state, const Bag& bag,
                            std::span<const double> p_repr) {
  thread_local std::vector<double> terms;
  terms.clear();
  for (const auto& [v, c] : bag) {
    const double g = word_gain(p_repr[v], state.count(v), c, state.delta());
    if (g != 0.0) terms.push_back(g);
  }
  std::sort(terms.begin(), terms.end());
  double gain = 0.0;
  for (double g : terms) gain += g;
  return gain;
}

inline ScoreBreakdown delta_h(const ModelState& state, const Bag& bag,
                              std::uint64_t token_count,
                              std::span<const double> p_repr) {
  ScoreBreakdown b;
  b.penalty = penalty(state.tokens(), static_cast<std::int64_t>(token_count),
                      state.smoothing_mass());
  b.gain = sentence_gain(state, bag, p_repr);
  b.delta_h = b.penalty + b.gain;
  b.state_version = state.version();
  return b;
}

inline ScoreBreakdown delta_h(const ModelState& state,
                              const SentenceRecord& s,
                              std::span<const double> p_repr) {
  return delta_h(state, s.bag, s.token_count, p_repr);
}

// Applies a scored sentence. `breakdown` must have been computed against
// exactly this state.
inline void update_state(ModelState& state, const Bag& bag,
                         std::uint64_t token_count,
                         const ScoreBreakdown& breakdown) {
  if (breakdown.state_version != state.version_) {
    throw ContractError("stale score: state changed since it was computed");
  }
  std::uint64_t sum = 0;
  for (const auto& [v, c] : bag) {
    if (v >= state.counts_.size()) {
      throw ContractError("type id outside the scoring vocabulary");
    }
    sum += c;
  }
  if (sum != token_count) {
    throw ContractError("token_count does not match the sentence bag");
  }
  if (token_count == 0) return;
  for (const auto& [v, c] : bag) state.counts_[v] += c;
  state.tokens_ += token_count;
  state.entropy_ += breakdown.delta_h;
  ++state.version_;
}

inline void update_state(ModelState& state, const SentenceRecord& s,
                         const ScoreBreakdown& breakdown) {
  update_state(state, s.bag, s.token_count, breakdown);
}

}  // namespace cynical
