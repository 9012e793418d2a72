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

// Minimal library usage: rank a handful of in-memory candidates.

#include <iostream>
#include <string>
#include <vector>

#include "cynical/cynical.hpp"

int main() {
  const std::vector<std::string> repr_text = {
      "the pangolin eats ants", "a pangolin sleeps", "pangolin scales are hard",
      "the ants run", "scales and ants"};
  const std::vector<std::string> avail = {
      "the stock market fell",       "a pangolin eats ants at night",
      "interest rates rose again",   "pangolin scales protect it",
      "the market rallied",          "ants and scales",
      "the pangolin sleeps all day", "rates and the market"};

  const cynical::CorpusStats repr = cynical::count_escaped(repr_text);
  cynical::SelectOptions opts;
  opts.mode = cynical::Mode::kFast;
  opts.squash.min_count = 1;

  auto selection =
      cynical::prepare_selection(repr, std::nullopt, avail, {}, opts);
  std::cout << "initial H = " << selection.engine.state().entropy()
            << " bits\n";
  const auto summary =
      cynical::write_jaded(selection.engine, opts, avail, std::cout);
  std::cout << cynical::format_summary(summary) << '\n';
  return 0;
}
