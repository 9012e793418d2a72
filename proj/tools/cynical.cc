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

// cynical: rank candidate sentences by how much each one lowers the
// cross-entropy of a representative corpus.
//
//   cynical stats  --in corpus.txt --out corpus.stats
//   cynical squash --repr R --avail A [--unadapt U] [--out vocab.tsv]
//   cynical select --repr R --avail A [--unadapt U] [--seed S] --out jaded.tsv
//   cynical eval   --subset S --repr R [--baseline moore-lewis --avail A]
//
// Exit codes: 0 ok, 2 input error, 3 nothing selectable.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cynical/cynical.hpp"

namespace {

constexpr int kExitInput = 2;
constexpr int kExitEmpty = 3;

void log_rewrites(std::uint64_t n) {
  if (n > 0) {
    std::cerr << "cynical: rewrote " << n
              << " reserved-token occurrence(s) with the 'raw:' prefix\n";
  }
}

std::optional<std::uint64_t> optional_count(std::uint64_t v) {
  return v == 0 ? std::nullopt : std::optional<std::uint64_t>(v);
}

bool same_file(const std::string& a, const std::string& b) {
  std::error_code ec;
  if (std::filesystem::equivalent(a, b, ec)) return true;
  const auto ca = std::filesystem::weakly_canonical(a, ec);
  if (ec) return false;
  const auto cb = std::filesystem::weakly_canonical(b, ec);
  return !ec && ca == cb;
}

struct SquashFlags {
  std::uint64_t min_count = 3;
  std::uint64_t min_count_repr = 0;
  std::uint64_t min_count_unadapt = 0;
  double ratio_lo = 0.5;
  double ratio_hi = 2.0;

  void add_to(CLI::App* app) {
    app->add_option("--min-count", min_count,
                    "counts below this are unreliable in both corpora");
    app->add_option("--min-count-repr", min_count_repr,
                    "override --min-count for the representative corpus");
    app->add_option("--min-count-unadapt", min_count_unadapt,
                    "override --min-count for the unadapted corpus");
    app->add_option("--ratio-lo", ratio_lo, "P_repr/P_unadapt at or below: bad");
    app->add_option("--ratio-hi", ratio_hi, "P_repr/P_unadapt at or above: kept");
  }

  cynical::SquashConfig config() const {
    cynical::SquashConfig cfg;
    cfg.min_count = min_count;
    cfg.min_count_repr = optional_count(min_count_repr);
    cfg.min_count_unadapt = optional_count(min_count_unadapt);
    cfg.ratio_lo = ratio_lo;
    cfg.ratio_hi = ratio_hi;
    try {
      cfg.validate();
    } catch (const cynical::ContractError& e) {
      throw cynical::InputError(e.what());
    }
    return cfg;
  }
};

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw cynical::InputError("cannot write " + path);
  return out;
}

int cmd_stats(const std::string& in, const std::string& out_path) {
  std::uint64_t rewrites = 0;
  const auto stats = cynical::count_escaped(cynical::read_lines(in), &rewrites);
  log_rewrites(rewrites);
  if (out_path.empty() || out_path == "-") {
    cynical::save_stats(stats, std::cout);
  } else {
    cynical::save_stats(stats, out_path);
  }
  return 0;
}

int cmd_squash(const std::string& repr_path, const std::string& unadapt_path,
               const std::string& avail_path, const std::string& out_path,
               const SquashFlags& flags) {
  std::uint64_t rewrites = 0;
  const auto repr = cynical::load_corpus_stats(repr_path, &rewrites);
  const auto avail =
      cynical::count_escaped(cynical::read_lines(avail_path), &rewrites);
  const auto unadapt = unadapt_path.empty()
                           ? avail
                           : cynical::load_corpus_stats(unadapt_path, &rewrites);
  log_rewrites(rewrites);
  const auto partition = cynical::partition_vocab(
      repr, unadapt, avail.vocabulary(), flags.config());

  std::vector<std::pair<std::string, cynical::Category>> rows(
      partition.categories().begin(), partition.categories().end());
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;  // kept first
    return a.first < b.first;
  });
  std::ofstream file;
  std::ostream* out = &std::cout;
  if (!out_path.empty() && out_path != "-") {
    file = open_out(out_path);
    out = &file;
  }
  for (const auto& [word, c] : rows) {
    *out << word << '\t' << cynical::category_name(c) << '\t'
         << repr.count(word) << '\t' << unadapt.count(word) << '\n';
  }
  const auto h = partition.histogram();
  std::cerr << "kept=" << h[5] << " dubious=" << h[0] << " bad=" << h[1]
            << " meh=" << h[2] << " impossible=" << h[3]
            << " useless=" << h[4] << '\n';
  return 0;
}

int cmd_select(const std::string& repr_path, const std::string& unadapt_path,
               const std::string& seed_path, const std::string& avail_path,
               const std::string& out_path, const cynical::SelectOptions& opts) {
  if (same_file(repr_path, out_path)) {
    throw cynical::InputError("output path must differ from --repr");
  }
  std::uint64_t rewrites = 0;
  const auto repr = cynical::load_corpus_stats(repr_path, &rewrites);
  std::optional<cynical::CorpusStats> unadapt;
  if (!unadapt_path.empty()) {
    unadapt = cynical::load_corpus_stats(unadapt_path, &rewrites);
  }
  const auto avail = cynical::read_lines(avail_path);
  const auto seed = seed_path.empty() ? std::vector<std::string>{}
                                      : cynical::read_lines(seed_path);
  auto selection =
      cynical::prepare_selection(repr, unadapt, avail, seed, opts, &rewrites);
  log_rewrites(rewrites);

  std::ofstream out = open_out(out_path);
  const auto summary =
      cynical::write_jaded(selection.engine, opts, avail, out);
  out.close();
  if (!out) throw cynical::InputError("write failed: " + out_path);
  std::cout << cynical::format_summary(summary, opts.log_base) << '\n';
  return 0;
}

int cmd_eval(const std::string& subset_path, const std::string& repr_path,
             double delta, const std::string& format,
             const std::string& baseline, const std::string& avail_path,
             const std::string& unadapt_path, const std::string& out_path,
             cynical::LogBase base) {
  const auto repr = cynical::load_corpus_stats(repr_path);
  if (!baseline.empty()) {
    if (avail_path.empty()) {
      throw cynical::InputError("--baseline moore-lewis needs --avail");
    }
    const auto avail = cynical::read_lines(avail_path);
    const auto pool = unadapt_path.empty()
                          ? cynical::count_escaped(avail)
                          : cynical::load_corpus_stats(unadapt_path);
    const auto ranked = cynical::moore_lewis_rank(avail, repr, pool, delta);
    std::ofstream file;
    std::ostream* out = &std::cout;
    if (!out_path.empty() && out_path != "-") {
      file = open_out(out_path);
      out = &file;
    }
    for (const auto& r : ranked) {
      *out << r.id << '\t'
           << cynical::format_real(cynical::from_bits(r.score, base)) << '\t'
           << avail[r.id] << '\n';
    }
    if (subset_path.empty()) return 0;
  }
  if (subset_path.empty()) throw cynical::InputError("--subset is required");
  const auto subset = cynical::read_lines(subset_path);
  const auto report = cynical::evaluate_subset(subset, repr, delta);
  if (format == "tsv") {
    std::cout << cynical::kReportTsvHeader << '\n'
              << cynical::format_report_tsv(report, base) << '\n';
  } else {
    std::cout << cynical::format_report_kv(report, base) << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cynical: incremental cross-entropy data selection"};
  app.require_subcommand(1);

  // stats
  std::string stats_in, stats_out;
  auto* stats = app.add_subcommand("stats", "write unigram statistics");
  stats->add_option("--in,input", stats_in, "text corpus")->required();
  stats->add_option("--out", stats_out, "stats file (default stdout)");

  // squash
  std::string sq_repr, sq_unadapt, sq_avail, sq_out;
  SquashFlags sq_flags;
  auto* squash = app.add_subcommand("squash", "show the vocabulary partition");
  squash->add_option("--repr", sq_repr, "representative text or stats")
      ->required();
  squash->add_option("--unadapt", sq_unadapt,
                     "unadapted text or stats (default: --avail)");
  squash->add_option("--avail", sq_avail, "candidate text")->required();
  squash->add_option("--out", sq_out, "TSV word/category/counts");
  sq_flags.add_to(squash);

  // select
  std::string repr, unadapt, seed, avail, out, mode = "fast", log_base = "2";
  double delta = cynical::kDefaultDelta;
  std::size_t patience = 10;
  std::uint64_t max_lines = 0, max_tokens = 0;
  bool exhaustive = false;
  SquashFlags sel_flags;
  auto* select = app.add_subcommand("select", "rank candidate sentences");
  select->add_option("--repr", repr, "representative text or stats")
      ->required();
  select->add_option("--unadapt", unadapt,
                     "unadapted text or stats (default: --avail)");
  select->add_option("--seed", seed, "already-selected text");
  select->add_option("--avail", avail, "candidate text")->required();
  select->add_option("--out", out, "JADED output")->required();
  select->add_option("--mode", mode, "exact, fast or batch")
      ->check(CLI::IsMember({"exact", "fast", "batch"}));
  select->add_option("--delta", delta, "smoothing count per type")
      ->check(CLI::PositiveNumber);
  select->add_option("--patience", patience,
                     "positive-dH selections in a row before stopping")
      ->check(CLI::Range(std::size_t{1}, std::numeric_limits<std::size_t>::max()));
  select->add_option("--max-lines", max_lines, "stop after this many lines");
  select->add_option("--max-tokens", max_tokens, "stop after this many tokens");
  select->add_flag("--exhaustive", exhaustive,
                   "ignore the dH stopping rule");
  select->add_option("--log-base", log_base, "2, e or 10 (reporting only)")
      ->check(CLI::IsMember({"2", "e", "10"}));
  sel_flags.add_to(select);

  // eval
  std::string ev_subset, ev_repr, ev_format = "kv", ev_baseline, ev_avail,
                                  ev_unadapt, ev_out, ev_log_base = "2";
  double ev_delta = cynical::kDefaultDelta;
  auto* eval = app.add_subcommand("eval", "evaluate a subset against REPR");
  eval->add_option("--subset", ev_subset, "selected text");
  eval->add_option("--repr", ev_repr, "representative text or stats")
      ->required();
  eval->add_option("--delta", ev_delta, "smoothing count per type")
      ->check(CLI::PositiveNumber);
  eval->add_option("--format", ev_format, "kv or tsv")
      ->check(CLI::IsMember({"kv", "tsv"}));
  eval->add_option("--baseline", ev_baseline, "moore-lewis")
      ->check(CLI::IsMember({"moore-lewis"}));
  eval->add_option("--avail", ev_avail, "candidates for the baseline ranking");
  eval->add_option("--unadapt", ev_unadapt, "pool corpus (default: --avail)");
  eval->add_option("--out", ev_out, "baseline ranking TSV (default stdout)");
  eval->add_option("--log-base", ev_log_base, "2, e or 10")
      ->check(CLI::IsMember({"2", "e", "10"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitInput;
  }

  try {
    if (*stats) return cmd_stats(stats_in, stats_out);
    if (*squash) {
      return cmd_squash(sq_repr, sq_unadapt, sq_avail, sq_out, sq_flags);
    }
    if (*select) {
      cynical::SelectOptions opts;
      opts.mode = mode == "exact"   ? cynical::Mode::kExact
                  : mode == "batch" ? cynical::Mode::kBatch
                                    : cynical::Mode::kFast;
      opts.delta = delta;
      opts.squash = sel_flags.config();
      opts.stop.patience = patience;
      opts.stop.max_lines = optional_count(max_lines);
      opts.stop.max_tokens = optional_count(max_tokens);
      opts.stop.exhaustive = exhaustive;
      opts.log_base = cynical::parse_log_base(log_base);
      return cmd_select(repr, unadapt, seed, avail, out, opts);
    }
    if (*eval) {
      return cmd_eval(ev_subset, ev_repr, ev_delta, ev_format, ev_baseline,
                      ev_avail, ev_unadapt, ev_out,
                      cynical::parse_log_base(ev_log_base));
    }
  } catch (const cynical::NothingSelectable& e) {
    std::cerr << "cynical: " << e.what() << '\n';
    return kExitEmpty;
  } catch (const cynical::InputError& e) {
    std::cerr << "cynical: " << e.what() << '\n';
    return kExitInput;
  } catch (const cynical::Error& e) {
    std::cerr << "cynical: " << e.what() << '\n';
    return kExitInput;
  }
  return 0;
}
