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

// End-to-end selection: corpora in, JADED rows out.

#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "cynical/corpus.hpp"
#include "cynical/jaded.hpp"
#include "cynical/score.hpp"
#include "cynical/select.hpp"
#include "cynical/squash.hpp"

namespace cynical {

// Loads a corpus given either as text or as a stats file (detected by the
// `#total` header). Reserved tokens are escaped either way.
inline CorpusStats load_corpus_stats(const std::string& path,
                                     std::uint64_t* rewrites = nullptr) {
  if (looks_like_stats(path)) return escape_stats(load_stats(path), rewrites);
  const auto lines = read_lines(path);
  return count_escaped(lines, rewrites);
}

struct SelectOptions {
  Mode mode = Mode::kFast;
  double delta = kDefaultDelta;
  SquashConfig squash;
  StopConfig stop;
  LogBase log_base = LogBase::kTwo;
};

struct Selection {
  VocabPartition partition;
  Engine engine;
};

// `unadapt` defaults to the statistics of `avail`.
inline Selection prepare_selection(const CorpusStats& repr,
                                   const std::optional<CorpusStats>& unadapt,
                                   std::span<const std::string> avail,
                                   std::span<const std::string> seed,
                                   const SelectOptions& opts,
                                   std::uint64_t* rewrites = nullptr) {
  const CorpusStats avail_stats = count_escaped(avail, rewrites);
  if (avail_stats.empty()) {
    throw NothingSelectable("available corpus has no non-blank lines");
  }
  const CorpusStats seed_stats = count_escaped(seed, rewrites);
  VocabPartition partition =
      partition_vocab(repr, unadapt ? *unadapt : avail_stats,
                      avail_stats.vocabulary(), opts.squash,
                      seed_stats.vocabulary());
  EngineOptions eo;
  eo.delta = opts.delta;
  eo.require_kept = opts.mode != Mode::kExact;
  Engine engine = build_engine(avail, seed, repr, partition, eo);
  return {std::move(partition), std::move(engine)};
}

// Runs the engine and streams JADED rows to `out`.
inline RunSummary write_jaded(Engine& engine, const SelectOptions& opts,
                              std::span<const std::string> avail,
                              std::ostream& out) {
  return run(engine, opts.stop, opts.mode, [&](const SelectionEvent& e) {
    out << format_jaded_row(e, avail[e.sentence_id], opts.log_base) << '\n';
  });
}

inline std::string format_summary(const RunSummary& s,
                                  LogBase base = LogBase::kTwo) {
  return "lines=" + std::to_string(s.lines) +
         " tokens=" + std::to_string(s.tokens) +
         " h=" + format_real(from_bits(s.h_bits, base)) + " stop=" +
         std::string(stop_reason_name(s.reason));
}

}  // namespace cynical
