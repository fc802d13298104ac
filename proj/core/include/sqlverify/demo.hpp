// Copyright 2026 The sqlverify Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace sqlverify {

// A self-contained miniature benchmark: five small databases (including
// reconstructions of the california_schools, superhero, and card_games
// shapes that the sample transcripts reference) and a 25-datapoint split
// whose gold SQL is verified executable. Used by the test suites and by
// `sqlverify make-fixtures` so the CLI can be driven without downloading
// anything.
struct DemoBenchmark {
  std::string db_root;      // <dir>/databases
  std::string split_path;   // <dir>/split.json
};

DemoBenchmark write_demo_benchmark(const std::string& dir);

// Writes a scripted stub backend for the demo benchmark, keyed by the
// digests of the prompts the standard template renders (3 sample rows per
// table). Every prompt gets 7 scripted completions in a 4/2/1 shape: four
// agreeing on one result, two agreeing on another, one unparsable. For
// datapoints listed in wrong_majority_ids the four-vote result is wrong and
// the two-vote result is the gold one; for everything else the majority is
// gold. Returns the script path.
std::string write_demo_stub_script(const std::string& path,
                                   const std::string& db_root,
                                   const std::string& split_path,
                                   const std::vector<std::int64_t>& wrong_majority_ids);

}  // namespace sqlverify
