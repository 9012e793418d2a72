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

// Vocabulary squashing.
//
// Words are classified by comparing their probability in the representative
// corpus against the unadapted corpus. Only words strongly biased towards
// the representative side (KEPT) keep their identity; everything else is
// collapsed into one of five reserved tokens.

#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cynical/corpus.hpp"
#include "cynical/error.hpp"

namespace cynical {

enum class Category : std::uint8_t {
  kDubious = 0,
  kBad = 1,
  kMeh = 2,
  kImpossible = 3,
  kUseless = 4,
  kKept = 5,
};

inline constexpr std::array<std::string_view, 5> kReservedTokens = {
    "dubious", "bad", "meh", "impossible", "useless"};
inline constexpr std::string_view kEscapePrefix = "raw:";

inline std::string_view category_name(Category c) {
  return c == Category::kKept ? std::string_view("kept")
                              : kReservedTokens[static_cast<int>(c)];
}

inline bool is_reserved_token(std::string_view word) {
  return std::find(kReservedTokens.begin(), kReservedTokens.end(), word) !=
         kReservedTokens.end();
}

// Reserved tokens (and anything already carrying the escape prefix, so the
// rewrite stays injective) get a `raw:` prefix.
inline bool needs_escape(std::string_view word) {
  return is_reserved_token(word) || word.starts_with(kEscapePrefix);
}

inline std::string escape_token(std::string_view word) {
  if (!needs_escape(word)) return std::string(word);
  std::string out(kEscapePrefix);
  out += word;
  return out;
}

// Tokenizes a line and escapes reserved tokens. `rewrites`, when given, is
// incremented once per rewritten token.
template <typename Fn>
void for_each_escaped_token(std::string_view line, Fn&& fn,
                            std::uint64_t* rewrites = nullptr) {
  std::string scratch;
  for_each_token(line, [&](std::string_view t) {
    if (needs_escape(t)) {
      if (rewrites) ++*rewrites;
      scratch = escape_token(t);
      fn(std::string_view(scratch));
    } else {
      fn(t);
    }
  });
}

inline CorpusStats count_escaped(std::span<const std::string> lines,
                                 std::uint64_t* rewrites = nullptr) {
  CorpusStats stats;
  for (const auto& line : lines) {
    for_each_escaped_token(
        line, [&](std::string_view t) { stats.add(t); }, rewrites);
  }
  return stats;
}

inline CorpusStats escape_stats(const CorpusStats& stats,
                                std::uint64_t* rewrites = nullptr) {
  CorpusStats out;
  for (const auto& [word, n] : stats.counts()) {
    if (needs_escape(word) && rewrites) *rewrites += n;
    out.add(escape_token(word), n);
  }
  return out;
}

struct SquashConfig {
  std::uint64_t min_count = 3;
  // Per-corpus overrides of min_count.
  std::optional<std::uint64_t> min_count_repr;
  std::optional<std::uint64_t> min_count_unadapt;
  double ratio_lo = 0.5;
  double ratio_hi = 2.0;

  std::uint64_t repr_threshold() const {
    return min_count_repr.value_or(min_count);
  }
  std::uint64_t unadapt_threshold() const {
    return min_count_unadapt.value_or(min_count);
  }

  void validate() const {
    if (repr_threshold() < 1 || unadapt_threshold() < 1) {
      throw ContractError("min_count must be >= 1");
    }
    if (!(ratio_lo > 0.0 && ratio_lo < 1.0 && ratio_hi > 1.0)) {
      throw ContractError("ratio thresholds must satisfy 0 < lo < 1 < hi");
    }
  }
};

class VocabPartition {
 public:
  VocabPartition() = default;

  void assign(std::string_view word, Category c) {
    categories_.insert_or_assign(std::string(word), c);
  }

  // Call once all words are assigned.
  void finalize() {
    kept_.clear();
    for (const auto& [word, c] : categories_) {
      if (c == Category::kKept) kept_.push_back(word);
    }
    std::sort(kept_.begin(), kept_.end());
  }

  const Category* find(std::string_view word) const {
    auto it = categories_.find(word);
    return it == categories_.end() ? nullptr : &it->second;
  }

  Category category(std::string_view word) const {
    if (const Category* c = find(word)) return *c;
    throw ContractError("word not covered by vocabulary partition: '" +
                        std::string(word) + "'");
  }

  // KEPT words in byte-wise order.
  const std::vector<std::string>& kept() const { return kept_; }
  std::size_t size() const { return categories_.size(); }
  const StringMap<Category>& categories() const { return categories_; }

  std::array<std::size_t, 6> histogram() const {
    std::array<std::size_t, 6> h{};
    for (const auto& [word, c] : categories_) ++h[static_cast<int>(c)];
    return h;
  }

 private:
  StringMap<Category> categories_;
  std::vector<std::string> kept_;
};

// Classifies one word; first matching rule wins.
inline Category classify(const CorpusStats& repr, const CorpusStats& unadapt,
                         bool in_avail, std::string_view word,
                         const SquashConfig& cfg) {
  const std::uint64_t c_repr = repr.count(word);
  const std::uint64_t c_unadapt = unadapt.count(word);
  if (c_repr > 0 && !in_avail) return Category::kImpossible;
  if (c_repr == 0) return Category::kUseless;
  if (c_repr < cfg.repr_threshold() && c_unadapt < cfg.unadapt_threshold()) {
    return Category::kDubious;
  }
  const double p_repr = static_cast<double>(c_repr) /
                        static_cast<double>(repr.total_tokens());
  const double ratio =
      c_unadapt == 0 ? std::numeric_limits<double>::infinity()
                     : p_repr / (static_cast<double>(c_unadapt) /
                                 static_cast<double>(unadapt.total_tokens()));
  if (ratio <= cfg.ratio_lo) return Category::kBad;
  if (ratio < cfg.ratio_hi) return Category::kMeh;
  return Category::kKept;
}

// Partitions REPR ∪ UNADAPT ∪ avail_vocab ∪ extra_vocab. `extra_vocab`
// covers corpora that are squashed but not selected from (the seed).
inline VocabPartition partition_vocab(const CorpusStats& repr,
                                      const CorpusStats& unadapt,
                                      const Vocabulary& avail_vocab,
                                      const SquashConfig& cfg,
                                      const Vocabulary& extra_vocab = {}) {
  cfg.validate();
  if (repr.empty()) throw InputError("representative corpus is empty");
  if (unadapt.empty()) throw InputError("unadapted corpus is empty");

  VocabPartition p;
  const auto visit = [&](std::string_view word) {
    if (p.find(word)) return;
    p.assign(word, classify(repr, unadapt, avail_vocab.contains(word), word,
                            cfg));
  };
  for (const auto& [word, n] : repr.counts()) visit(word);
  for (const auto& [word, n] : unadapt.counts()) visit(word);
  for (const auto& word : avail_vocab) visit(word);
  for (const auto& word : extra_vocab) visit(word);
  p.finalize();
  return p;
}

inline std::string_view squash_token(std::string_view word,
                                     const VocabPartition& p) {
  const Category c = p.category(word);
  return c == Category::kKept ? word : kReservedTokens[static_cast<int>(c)];
}

inline std::vector<std::string> apply_squash(
    std::span<const std::string> tokens, const VocabPartition& p) {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.emplace_back(squash_token(t, p));
  return out;
}

inline CorpusStats squash_stats(const CorpusStats& stats,
                                const VocabPartition& p) {
  CorpusStats out;
  for (const auto& [word, n] : stats.counts()) out.add(squash_token(word, p), n);
  return out;
}

// The interned scoring vocabulary: ids 0..4 are the reserved tokens in
// kReservedTokens order, then KEPT words in byte-wise order. Also holds the
// squashed representative distribution, indexed by id.
class ScoringVocab {
 public:
  static constexpr TypeId kFirstKept = 5;

  ScoringVocab(const VocabPartition& partition, const CorpusStats& repr) {
    if (repr.empty()) throw InputError("representative corpus is empty");
    names_.assign(kReservedTokens.begin(), kReservedTokens.end());
    names_.insert(names_.end(), partition.kept().begin(),
                  partition.kept().end());
    raw_to_id_.reserve(partition.size());
    for (const auto& [word, c] : partition.categories()) {
      raw_to_id_.emplace(word, static_cast<TypeId>(c));
    }
    for (TypeId id = kFirstKept; id < names_.size(); ++id) {
      raw_to_id_[names_[id]] = id;
    }
    p_repr_.assign(names_.size(), 0.0);
    const double total = static_cast<double>(repr.total_tokens());
    const CorpusStats squashed = squash_stats(repr, partition);
    for (TypeId id = 0; id < names_.size(); ++id) {
      p_repr_[id] = static_cast<double>(squashed.count(names_[id])) / total;
    }
  }

  std::size_t size() const { return names_.size(); }
  std::size_t kept_size() const { return names_.size() - kFirstKept; }
  bool is_kept(TypeId id) const { return id >= kFirstKept; }
  const std::string& name(TypeId id) const { return names_[id]; }
  std::span<const double> p_repr() const { return p_repr_; }

  // Maps a raw (escaped) word straight to its squashed id.
  TypeId encode(std::string_view raw_word) const {
    auto it = raw_to_id_.find(raw_word);
    if (it == raw_to_id_.end()) {
      throw ContractError("word not covered by vocabulary partition: '" +
                          std::string(raw_word) + "'");
    }
    return it->second;
  }

 private:
  std::vector<std::string> names_;
  StringMap<TypeId> raw_to_id_;
  std::vector<double> p_repr_;
};

}  // namespace cynical
