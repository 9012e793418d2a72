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

// Tokenization, unigram counting and the stats-file format.
//
// A stats file lets a corpus be shared as word counts without its text:
//
//   #total<TAB>W
//   word<TAB>count
//   ...
//
// Rows are sorted by descending count, ties by byte-wise word order, so
// that saving the same statistics always produces the same bytes.

#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "cynical/error.hpp"

namespace cynical {

struct StringHash {
  using is_transparent = void;
  std::size_t operator()(std::string_view s) const noexcept {
    return std::hash<std::string_view>{}(s);
  }
};

template <typename V>
using StringMap = std::unordered_map<std::string, V, StringHash, std::equal_to<>>;
using Vocabulary = std::unordered_set<std::string, StringHash, std::equal_to<>>;

namespace internal {

// Decodes one UTF-8 sequence starting at `pos`. Returns the code point and
// advances `pos`, or returns -1 on an invalid sequence (pos untouched).
inline long decode_utf8(std::string_view s, std::size_t& pos) {
  const auto byte = [&](std::size_t i) {
    return static_cast<unsigned char>(s[i]);
  };
  const unsigned char lead = byte(pos);
  if (lead < 0x80) {
    ++pos;
    return lead;
  }
  int len = 0;
  long cp = 0;
  long min = 0;
  if ((lead & 0xE0) == 0xC0) {
    len = 2, cp = lead & 0x1F, min = 0x80;
  } else if ((lead & 0xF0) == 0xE0) {
    len = 3, cp = lead & 0x0F, min = 0x800;
  } else if ((lead & 0xF8) == 0xF0) {
    len = 4, cp = lead & 0x07, min = 0x10000;
  } else {
    return -1;
  }
  if (pos + len > s.size()) return -1;
  for (int i = 1; i < len; ++i) {
    const unsigned char b = byte(pos + i);
    if ((b & 0xC0) != 0x80) return -1;
    cp = (cp << 6) | (b & 0x3F);
  }
  if (cp < min || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return -1;
  pos += len;
  return cp;
}

// Unicode White_Space property.
constexpr bool is_unicode_space(long cp) {
  return (cp >= 0x09 && cp <= 0x0D) || cp == 0x20 || cp == 0x85 ||
         cp == 0xA0 || cp == 0x1680 || (cp >= 0x2000 && cp <= 0x200A) ||
         cp == 0x2028 || cp == 0x2029 || cp == 0x202F || cp == 0x205F ||
         cp == 0x3000;
}

}  // namespace internal

// Calls `fn(token)` for each run of non-whitespace in `line`, in order.
// Throws InputError naming the byte offset of the first invalid UTF-8 byte.
template <typename Fn>
void for_each_token(std::string_view line, Fn&& fn) {
  std::size_t pos = 0;
  std::size_t start = std::string_view::npos;
  while (pos < line.size()) {
    const std::size_t here = pos;
    const long cp = internal::decode_utf8(line, pos);
    if (cp < 0) {
      throw InputError("invalid UTF-8 at byte offset " + std::to_string(here));
    }
    if (internal::is_unicode_space(cp)) {
      if (start != std::string_view::npos) {
        fn(line.substr(start, here - start));
        start = std::string_view::npos;
      }
    } else if (start == std::string_view::npos) {
      start = here;
    }
  }
  if (start != std::string_view::npos) fn(line.substr(start));
}

// Splits on runs of Unicode whitespace. No case folding or normalization.
inline std::vector<std::string> tokenize(std::string_view line) {
  std::vector<std::string> tokens;
  for_each_token(line, [&](std::string_view t) { tokens.emplace_back(t); });
  return tokens;
}

// Word-type counts of one corpus. Zero counts are never stored.
class CorpusStats {
 public:
  CorpusStats() = default;

  void add(std::string_view word, std::uint64_t n = 1) {
    if (n == 0) return;
    auto it = counts_.find(word);
    if (it == counts_.end()) {
      counts_.emplace(std::string(word), n);
    } else {
      it->second += n;
    }
    total_ += n;
  }

  // Adds every count of `other`. Counting shards and merging them gives the
  // same result as counting the concatenation.
  void merge(const CorpusStats& other) {
    for (const auto& [word, n] : other.counts_) add(word, n);
  }

  std::uint64_t count(std::string_view word) const {
    auto it = counts_.find(word);
    return it == counts_.end() ? 0 : it->second;
  }
  bool contains(std::string_view word) const { return counts_.contains(word); }

  std::uint64_t total_tokens() const { return total_; }
  std::uint64_t total_types() const { return counts_.size(); }
  bool empty() const { return total_ == 0; }
  const StringMap<std::uint64_t>& counts() const { return counts_; }

  Vocabulary vocabulary() const {
    Vocabulary v;
    v.reserve(counts_.size());
    for (const auto& [word, n] : counts_) v.insert(word);
    return v;
  }

  // (word, count) pairs in stats-file order.
  std::vector<std::pair<std::string, std::uint64_t>> sorted() const {
    std::vector<std::pair<std::string, std::uint64_t>> rows(counts_.begin(),
                                                           counts_.end());
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
      if (a.second != b.second) return a.second > b.second;
      return a.first < b.first;
    });
    return rows;
  }

  friend bool operator==(const CorpusStats& a, const CorpusStats& b) {
    return a.total_ == b.total_ && a.counts_ == b.counts_;
  }

 private:
  StringMap<std::uint64_t> counts_;
  std::uint64_t total_ = 0;
};

inline CorpusStats count_corpus(std::span<const std::string> lines) {
  CorpusStats stats;
  for (const auto& line : lines) {
    for_each_token(line, [&](std::string_view t) { stats.add(t); });
  }
  return stats;
}

// Empirical unigram probability C(v)/W; 0 for absent words.
inline double unigram_prob(const CorpusStats& stats, std::string_view word) {
  if (stats.empty()) {
    throw Error("undefined distribution: corpus has no tokens");
  }
  return static_cast<double>(stats.count(word)) /
         static_cast<double>(stats.total_tokens());
}

inline constexpr std::string_view kStatsHeader = "#total\t";

inline void save_stats(const CorpusStats& stats, std::ostream& out) {
  out << kStatsHeader << stats.total_tokens() << '\n';
  for (const auto& [word, n] : stats.sorted()) {
    if (word.find_first_of("\t\n") != std::string::npos) {
      throw ContractError("word contains TAB or newline: cannot save stats");
    }
    out << word << '\t' << n << '\n';
  }
}

inline CorpusStats load_stats(std::istream& in) {
  const auto fail = [](std::size_t line_no, const std::string& what) {
    return InputError("stats line " + std::to_string(line_no) + ": " + what);
  };
  const auto parse_count = [](std::string_view text, std::uint64_t& out) {
    if (text.empty() || text.front() < '0' || text.front() > '9') return false;
    auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    return ec == std::errc() && end == text.data() + text.size();
  };

  std::string line;
  if (!std::getline(in, line) || !line.starts_with(kStatsHeader)) {
    throw fail(1, "missing '#total<TAB><count>' header");
  }
  std::uint64_t declared = 0;
  if (!parse_count(std::string_view(line).substr(kStatsHeader.size()),
                   declared)) {
    throw fail(1, "bad total in header");
  }

  CorpusStats stats;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 ||
        line.find('\t', tab + 1) != std::string::npos) {
      throw fail(line_no, "expected '<word><TAB><count>'");
    }
    const std::string_view word = std::string_view(line).substr(0, tab);
    std::uint64_t n = 0;
    if (!parse_count(std::string_view(line).substr(tab + 1), n) || n == 0) {
      throw fail(line_no, "count must be a positive integer");
    }
    if (stats.contains(word)) {
      throw fail(line_no, "duplicate word '" + std::string(word) + "'");
    }
    stats.add(word, n);
  }
  if (stats.total_tokens() != declared) {
    throw fail(1, "header total " + std::to_string(declared) +
                      " != sum of counts " +
                      std::to_string(stats.total_tokens()));
  }
  return stats;
}

inline void save_stats(const CorpusStats& stats, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path);
  save_stats(stats, out);
  if (!out) throw InputError("write failed: " + path);
}

inline CorpusStats load_stats(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  try {
    return load_stats(in);
  } catch (const InputError& e) {
    throw InputError(path + ": " + e.what());
  }
}

// Reads a text file as lines. A trailing CR is dropped from each line.
inline std::vector<std::string> read_lines(std::istream& in) {
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

inline std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  return read_lines(in);
}

// True when the stream starts with the stats-file header.
inline bool looks_like_stats(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  std::string head(kStatsHeader.size(), '\0');
  in.read(head.data(), static_cast<std::streamsize>(head.size()));
  return in.gcount() == static_cast<std::streamsize>(head.size()) &&
         head == kStatsHeader;
}

// ---------------------------------------------------------------------------
// Interned sentences.

using TypeId = std::uint32_t;

struct TypeCount {
  TypeId type;
  std::uint32_t count;
  friend bool operator==(const TypeCount&, const TypeCount&) = default;
};

// Distinct types of a token sequence with their counts, sorted by type.
using Bag = std::vector<TypeCount>;

inline Bag make_bag(std::span<const TypeId> tokens) {
  std::vector<TypeId> sorted(tokens.begin(), tokens.end());
  std::sort(sorted.begin(), sorted.end());
  Bag bag;
  for (TypeId t : sorted) {
    if (!bag.empty() && bag.back().type == t) {
      ++bag.back().count;
    } else {
      bag.push_back({t, 1});
    }
  }
  return bag;
}

// A candidate line after squashing and interning.
struct SentenceRecord {
  std::uint64_t id = 0;  // 0-based line index in the candidate file
  Bag bag;
  std::uint64_t token_count = 0;
  double cached_gain = 0.0;
  std::uint64_t cached_at = 0;  // iteration at which cached_gain was computed
  std::uint32_t dup_group = 0;  // equal for identical token sequences
};

}  // namespace cynical
