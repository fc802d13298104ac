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
#include <optional>
#include <string>
#include <vector>

#include "sqlverify/dataset.hpp"
#include "sqlverify/errors.hpp"
#include "sqlverify/sqlexec.hpp"
#include "sqlverify/thread_pool.hpp"
#include "sqlverify/trace.hpp"

namespace sqlverify {

// The verifiable reward for one (datapoint, trace) pair.
//
//   +1  result sets match
//    0  executable but wrong (mismatch, runtime error, timeout, row cap)
//   -1  no SQL in the declared delimiters, or the SQL does not compile
//
// Timeouts and runtime errors are deliberately 0, not -1: the penalty is
// scoped to SQL that is not syntactically valid, and those queries parse.
struct RewardRecord {
  int reward = 0;
  bool match = false;
  ExecutionOutcome gold_outcome;
  std::optional<ExecutionOutcome> pred_outcome;  // absent when extraction failed
  ExtractionStatus extraction_status = ExtractionStatus::kNotFound;
};

// The gold SQL itself failed to execute. A dataset or fixture problem —
// never a model failure — so the datapoint is flagged and excluded from
// accuracy denominators rather than scored.
class GoldExecutionError : public Error {
 public:
  explicit GoldExecutionError(ExecutionOutcome gold_outcome)
      : Error(std::string("gold SQL failed to execute: ") +
              to_string(gold_outcome.status) +
              (gold_outcome.detail.empty() ? "" : " (" + gold_outcome.detail + ")")),
        gold_outcome_(std::move(gold_outcome)) {}
  const ExecutionOutcome& gold_outcome() const { return gold_outcome_; }

 private:
  ExecutionOutcome gold_outcome_;
};

// extract -> execute gold -> execute predicted -> compare canonical sets.
// Throws GoldExecutionError when the gold SQL does not succeed.
RewardRecord score(const Datapoint& dp, const GenerationTrace& trace,
                   const std::string& db_path, const SandboxConfig& cfg);

// One row of evaluate_split output, in input order.
struct EvaluatedItem {
  std::int64_t question_id = 0;
  bool gold_failed = false;
  std::optional<RewardRecord> record;           // present unless gold_failed
  std::optional<ExecutionOutcome> gold_outcome; // present when gold_failed
};

struct SplitReport {
  std::int64_t n = 0;
  std::int64_t n_correct = 0;        // reward == 1
  std::int64_t n_invalid = 0;        // reward == -1
  std::int64_t n_gold_failures = 0;  // excluded from the denominator
  // 100 * n_correct / (n - n_gold_failures), rounded half-up to 2 decimals.
  double accuracy_percent = 0.0;
};

struct SplitEvaluation {
  SplitReport report;
  std::vector<EvaluatedItem> items;
};

// Scores every (datapoint, trace) pair, fanned out across `pool`. Records
// come back in input order. Throws UsageError when the lists are not
// aligned.
SplitEvaluation evaluate_split(const std::vector<Datapoint>& dps,
                               const std::vector<GenerationTrace>& traces,
                               const DatabaseCatalog& catalog,
                               const SandboxConfig& cfg, ThreadPool& pool);

// Exact half-up rounding of 100*numer/denom to two decimals, e.g.
// (1086, 1534) -> "70.80". Returns "0.00" when denom == 0.
std::string format_accuracy_percent(std::int64_t numer, std::int64_t denom);
double accuracy_percent_value(std::int64_t numer, std::int64_t denom);

// {reward, match, pred_status, gold_status, elapsed_ms}; the shape served
// by the scoring service. pred_status is "extraction_failed" when no SQL
// was extracted.
std::string to_json_string(const RewardRecord& rec);

// {question_id, reward, match, pred_status, gold_status, elapsed_ms}.
// pred_status is "extraction_failed" when no SQL was extracted and
// "not_run" when the gold failure made prediction scoring moot.
std::string to_json_string(const EvaluatedItem& item);

// JSON object mirroring SplitReport (accuracy_percent as a 2-decimal string).
std::string to_json_string(const SplitReport& report);

// One header row plus one value row: n,n_correct,n_invalid,n_gold_failures,
// accuracy_percent.
std::string to_csv(const SplitReport& report);

}  // namespace sqlverify
