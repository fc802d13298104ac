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

#include "sqlverify/reward.hpp"

#include <cinttypes>
#include <cstdio>
#include <future>

#include "json.hpp"

using nlohmann::json;

namespace sqlverify {

RewardRecord score(const Datapoint& dp, const GenerationTrace& trace,
                   const std::string& db_path, const SandboxConfig& cfg) {
  RewardRecord rec;
  rec.extraction_status = trace.extraction_status;

  rec.gold_outcome = execute(db_path, dp.gold_sql, cfg);
  if (!rec.gold_outcome.ok()) {
    throw GoldExecutionError(rec.gold_outcome);
  }

  if (trace.extraction_status == ExtractionStatus::kNotFound) {
    rec.reward = -1;
    return rec;
  }

  rec.pred_outcome = execute(db_path, *trace.extracted_sql, cfg);
  switch (rec.pred_outcome->status) {
    case ExecStatus::kSuccess:
      rec.match = *rec.pred_outcome->rows == *rec.gold_outcome.rows;
      rec.reward = rec.match ? 1 : 0;
      break;
    case ExecStatus::kSyntaxError:
      rec.reward = -1;
      break;
    case ExecStatus::kRuntimeError:
    case ExecStatus::kTimeout:
    case ExecStatus::kRowCapExceeded:
      rec.reward = 0;
      break;
  }
  return rec;
}

SplitEvaluation evaluate_split(const std::vector<Datapoint>& dps,
                               const std::vector<GenerationTrace>& traces,
                               const DatabaseCatalog& catalog,
                               const SandboxConfig& cfg, ThreadPool& pool) {
  if (dps.size() != traces.size()) {
    throw UsageError("split and trace lists are misaligned: " +
                     std::to_string(dps.size()) + " datapoints vs " +
                     std::to_string(traces.size()) + " traces");
  }

  std::vector<std::future<EvaluatedItem>> futures;
  futures.reserve(dps.size());
  for (std::size_t i = 0; i < dps.size(); ++i) {
    const Datapoint& dp = dps[i];
    const GenerationTrace& trace = traces[i];
    const std::string& db_path = catalog.resolve(dp.db_id);
    futures.push_back(pool.submit([&dp, &trace, db_path, &cfg] {
      EvaluatedItem item;
      item.question_id = dp.question_id;
      try {
        item.record = score(dp, trace, db_path, cfg);
      } catch (const GoldExecutionError& e) {
        item.gold_failed = true;
        item.gold_outcome = e.gold_outcome();
      }
      return item;
    }));
  }

  SplitEvaluation eval;
  eval.items.reserve(dps.size());
  for (auto& fut : futures) eval.items.push_back(fut.get());

  SplitReport& report = eval.report;
  report.n = static_cast<std::int64_t>(eval.items.size());
  for (const auto& item : eval.items) {
    if (item.gold_failed) {
      ++report.n_gold_failures;
      continue;
    }
    if (item.record->reward == 1) ++report.n_correct;
    if (item.record->reward == -1) ++report.n_invalid;
  }
  report.accuracy_percent =
      accuracy_percent_value(report.n_correct, report.n - report.n_gold_failures);
  return eval;
}

namespace {

// Half-up rounding of 100*numer/denom at two decimals, in exact integer
// arithmetic: hundredths = floor((20000*numer + denom) / (2*denom)).
std::int64_t accuracy_hundredths(std::int64_t numer, std::int64_t denom) {
  if (denom <= 0) return 0;
  return (20000 * numer + denom) / (2 * denom);
}

}  // namespace

std::string format_accuracy_percent(std::int64_t numer, std::int64_t denom) {
  const std::int64_t h = accuracy_hundredths(numer, denom);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%" PRId64 ".%02" PRId64, h / 100, h % 100);
  return buf;
}

double accuracy_percent_value(std::int64_t numer, std::int64_t denom) {
  return static_cast<double>(accuracy_hundredths(numer, denom)) / 100.0;
}

std::string to_json_string(const RewardRecord& rec) {
  json j;
  j["reward"] = rec.reward;
  j["match"] = rec.match;
  j["pred_status"] = rec.pred_outcome ? to_string(rec.pred_outcome->status)
                                      : "extraction_failed";
  j["gold_status"] = to_string(rec.gold_outcome.status);
  j["elapsed_ms"] = rec.gold_outcome.elapsed_ms +
                    (rec.pred_outcome ? rec.pred_outcome->elapsed_ms : 0);
  return j.dump();
}

std::string to_json_string(const EvaluatedItem& item) {
  json j;
  j["question_id"] = item.question_id;
  if (item.gold_failed) {
    j["reward"] = 0;
    j["match"] = false;
    j["pred_status"] = "not_run";
    j["gold_status"] = to_string(item.gold_outcome->status);
    j["elapsed_ms"] = item.gold_outcome->elapsed_ms;
    j["gold_failed"] = true;
    return j.dump();
  }
  const RewardRecord& rec = *item.record;
  j["reward"] = rec.reward;
  j["match"] = rec.match;
  j["pred_status"] = rec.pred_outcome ? to_string(rec.pred_outcome->status)
                                      : "extraction_failed";
  j["gold_status"] = to_string(rec.gold_outcome.status);
  j["elapsed_ms"] = rec.gold_outcome.elapsed_ms +
                    (rec.pred_outcome ? rec.pred_outcome->elapsed_ms : 0);
  return j.dump();
}

std::string to_json_string(const SplitReport& report) {
  json j;
  j["n"] = report.n;
  j["n_correct"] = report.n_correct;
  j["n_invalid"] = report.n_invalid;
  j["n_gold_failures"] = report.n_gold_failures;
  j["accuracy_percent"] =
      format_accuracy_percent(report.n_correct, report.n - report.n_gold_failures);
  return j.dump();
}

std::string to_csv(const SplitReport& report) {
  std::string out = "n,n_correct,n_invalid,n_gold_failures,accuracy_percent\n";
  out += std::to_string(report.n) + "," + std::to_string(report.n_correct) + "," +
         std::to_string(report.n_invalid) + "," +
         std::to_string(report.n_gold_failures) + "," +
         format_accuracy_percent(report.n_correct,
                                 report.n - report.n_gold_failures) +
         "\n";
  return out;
}

}  // namespace sqlverify
