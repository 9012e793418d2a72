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

// The ranked output file. One row per selected line, no header:
//
//   iteration  batch_index  sentence_id  trigger_word  penalty  gain
//   delta_h  h_after  original_text
//
// Scores use 6 decimal places. The text column is last and may itself
// contain tabs.

#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include "cynical/error.hpp"
#include "cynical/select.hpp"

namespace cynical {

enum class LogBase { kTwo, kE, kTen };

inline LogBase parse_log_base(std::string_view s) {
  if (s == "2") return LogBase::kTwo;
  if (s == "e") return LogBase::kE;
  if (s == "10") return LogBase::kTen;
  throw InputError("log base must be one of 2, e, 10");
}

// Converts bits to the reporting unit.
inline double from_bits(double bits, LogBase base) {
  switch (base) {
    case LogBase::kTwo:
      return bits;
    case LogBase::kE:
      return bits * std::numbers::ln2;
    case LogBase::kTen:
      return bits * std::numbers::ln2 / std::numbers::ln10;
  }
  return bits;
}

inline std::string format_real(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", x);
  return buf;
}

inline std::string format_jaded_row(const SelectionEvent& e,
                                    std::string_view text,
                                    LogBase base = LogBase::kTwo) {
  std::string row;
  row += std::to_string(e.iteration);
  row += '\t';
  row += std::to_string(e.batch_index);
  row += '\t';
  row += std::to_string(e.sentence_id);
  row += '\t';
  row += e.trigger_word;
  for (double x : {e.penalty, e.gain, e.delta_h, e.h_after}) {
    row += '\t';
    row += format_real(from_bits(x, base));
  }
  row += '\t';
  row += text;
  return row;
}

struct JadedRow {
  std::uint64_t iteration = 0;
  std::uint64_t batch_index = 0;
  std::uint64_t sentence_id = 0;
  std::string trigger_word;
  double penalty = 0.0;
  double gain = 0.0;
  double delta_h = 0.0;
  double h_after = 0.0;
  std::string text;
};

inline JadedRow parse_jaded_row(std::string_view line) {
  std::vector<std::string_view> cols;
  std::size_t pos = 0;
  while (cols.size() < 8) {
    const auto tab = line.find('\t', pos);
    if (tab == std::string_view::npos) throw InputError("short JADED row");
    cols.push_back(line.substr(pos, tab - pos));
    pos = tab + 1;
  }
  const auto to_u64 = [](std::string_view s) {
    std::uint64_t x = 0;
    auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
    if (ec != std::errc() || end != s.data() + s.size()) {
      throw InputError("bad integer in JADED row");
    }
    return x;
  };
  const auto to_real = [](std::string_view s) {
    return std::stod(std::string(s));
  };
  JadedRow r;
  r.iteration = to_u64(cols[0]);
  r.batch_index = to_u64(cols[1]);
  r.sentence_id = to_u64(cols[2]);
  r.trigger_word = std::string(cols[3]);
  r.penalty = to_real(cols[4]);
  r.gain = to_real(cols[5]);
  r.delta_h = to_real(cols[6]);
  r.h_after = to_real(cols[7]);
  r.text = std::string(line.substr(pos));
  return r;
}

}  // namespace cynical
