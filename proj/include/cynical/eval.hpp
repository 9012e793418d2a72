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

// Post-hoc evaluation of a selected subset, and a unigram cross-entropy
// difference (Moore-Lewis) ranker for comparison.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cynical/corpus.hpp"
#include "cynical/jaded.hpp"
#include "cynical/score.hpp"
#include "cynical/squash.hpp"

namespace cynical {

struct EvalReport {
  std::uint64_t subset_lines = 0;  // non-blank
  std::uint64_t subset_tokens = 0;
  double h_bits = 0.0;
  double perplexity = 0.0;
  std::uint64_t oov_tokens = 0;
  std::uint64_t oov_types = 0;
  double oov_token_rate = 0.0;
};

// Cross-entropy of REPR under the delta-smoothed unigram model of `subset`,
// over the raw (unsquashed) vocabulary REPR ∪ subset.
inline double unigram_cross_entropy(const CorpusStats& subset,
                                    const CorpusStats& repr, double delta) {
  if (repr.empty()) throw InputError("representative corpus is empty");
  StringMap<TypeId> ids;
  const auto intern = [&](const std::string& w) {
    ids.try_emplace(w, static_cast<TypeId>(ids.size()));
  };
  for (const auto& [w, n] : repr.sorted()) intern(w);
  for (const auto& [w, n] : subset.sorted()) intern(w);

  std::vector<double> p(ids.size(), 0.0);
  for (const auto& [w, n] : repr.counts()) {
    p[ids.at(w)] = static_cast<double>(n) /
                   static_cast<double>(repr.total_tokens());
  }
  ModelState state(ids.size(), delta, p);
  Bag bag;
  for (const auto& [w, n] : subset.counts()) {
    bag.push_back({ids.at(w), static_cast<std::uint32_t>(n)});
  }
  std::sort(bag.begin(), bag.end(),
            [](const TypeCount& a, const TypeCount& b) { return a.type < b.type; });
  state.prime(bag);
  return cross_entropy(state, p);
}

inline EvalReport evaluate_subset(std::span<const std::string> subset_lines,
                                  const CorpusStats& repr, double delta) {
  EvalReport r;
  const CorpusStats subset = count_escaped(subset_lines);
  for (const auto& line : subset_lines) {
    bool any = false;
    for_each_token(line, [&](std::string_view) { any = true; });
    r.subset_lines += any;
  }
  r.subset_tokens = subset.total_tokens();
  r.h_bits = unigram_cross_entropy(subset, repr, delta);
  r.perplexity = std::exp2(r.h_bits);
  for (const auto& [w, n] : repr.counts()) {
    if (!subset.contains(w)) {
      ++r.oov_types;
      r.oov_tokens += n;
    }
  }
  r.oov_token_rate = static_cast<double>(r.oov_tokens) /
                     static_cast<double>(repr.total_tokens());
  return r;
}

inline std::string format_report_kv(const EvalReport& r,
                                    LogBase base = LogBase::kTwo) {
  std::string s;
  s += "lines=" + std::to_string(r.subset_lines);
  s += " tokens=" + std::to_string(r.subset_tokens);
  s += " h=" + format_real(from_bits(r.h_bits, base));
  s += " perplexity=" + format_real(r.perplexity);
  s += " oov_tokens=" + std::to_string(r.oov_tokens);
  s += " oov_types=" + std::to_string(r.oov_types);
  s += " oov_token_rate=" + format_real(r.oov_token_rate);
  return s;
}

inline constexpr std::string_view kReportTsvHeader =
    "lines\ttokens\th\tperplexity\toov_tokens\toov_types\toov_token_rate";

inline std::string format_report_tsv(const EvalReport& r,
                                     LogBase base = LogBase::kTwo) {
  std::string s;
  s += std::to_string(r.subset_lines) + '\t';
  s += std::to_string(r.subset_tokens) + '\t';
  s += format_real(from_bits(r.h_bits, base)) + '\t';
  s += format_real(r.perplexity) + '\t';
  s += std::to_string(r.oov_tokens) + '\t';
  s += std::to_string(r.oov_types) + '\t';
  s += format_real(r.oov_token_rate);
  return s;
}

struct MooreLewisScore {
  std::uint64_t id = 0;
  double score = 0.0;  // bits per token; lower is more in-domain
};

// Ranks non-blank lines by H_in(s) - H_pool(s), each the per-token
// cross-entropy under a delta-smoothed unigram model. Both models share the
// vocabulary in ∪ pool ∪ avail.
inline std::vector<MooreLewisScore> moore_lewis_rank(
    std::span<const std::string> avail, const CorpusStats& in_stats,
    const CorpusStats& pool_stats, double delta) {
  if (in_stats.empty() || pool_stats.empty()) {
    throw InputError("Moore-Lewis needs non-empty in-domain and pool corpora");
  }
  if (!(delta > 0.0)) throw ContractError("delta must be > 0");
  Vocabulary vocab = in_stats.vocabulary();
  for (const auto& [w, n] : pool_stats.counts()) vocab.insert(w);
  for (const auto& line : avail) {
    for_each_escaped_token(line, [&](std::string_view t) {
      if (!vocab.contains(t)) vocab.emplace(t);
    });
  }
  const double mass = delta * static_cast<double>(vocab.size());
  const auto log_q = [&](const CorpusStats& m, std::string_view w) {
    return std::log2(static_cast<double>(m.count(w)) + delta) -
           std::log2(static_cast<double>(m.total_tokens()) + mass);
  };

  std::vector<MooreLewisScore> out;
  for (std::size_t i = 0; i < avail.size(); ++i) {
    double h_in = 0.0;
    double h_pool = 0.0;
    std::uint64_t n = 0;
    for_each_escaped_token(avail[i], [&](std::string_view t) {
      h_in -= log_q(in_stats, t);
      h_pool -= log_q(pool_stats, t);
      ++n;
    });
    if (n == 0) continue;
    const double len = static_cast<double>(n);
    out.push_back({i, h_in / len - h_pool / len});
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const MooreLewisScore& a, const MooreLewisScore& b) {
                     return a.score < b.score;
                   });
  return out;
}

}  // namespace cynical
