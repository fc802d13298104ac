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
#include "sqlverify/modelclient.hpp"
#include "sqlverify/reward.hpp"
#include "sqlverify/sqlexec.hpp"
#include "sqlverify/thread_pool.hpp"
#include "sqlverify/trace.hpp"

namespace sqlverify {

// One prompt's k sampled traces and their rewards: the unit of group
// advantage math and of offline collection.
struct RolloutGroup {
  std::int64_t prompt_id = 0;
  std::vector<GenerationTrace> traces;
  std::vector<double> rewards;  // aligned with traces; values in {-1, 0, 1}

  std::size_t k() const { return rewards.size(); }
};

// Group-relative advantages: a_i = (r_i - mean) / (std + eps), population
// standard deviation. Uniform groups get exactly-zero numerators, so their
// advantages are all zero.
struct AdvantageVector {
  std::vector<double> values;
  double group_mean = 0.0;
  double group_std = 0.0;
};

// eps keeps the division well-defined for zero-variance groups (k = 1 or
// saturated). Throws UsageError on an empty group or non-positive eps.
AdvantageVector group_advantages(const std::vector<double>& rewards,
                                 double eps = 1e-6);

// Drops every group whose rewards are all equal: all-success groups are
// saturated and all-fail groups carry no gradient signal either way. Input
// order is preserved. Idempotent.
std::vector<RolloutGroup> filter_saturated(std::vector<RolloutGroup> groups);

struct SamplingParams {
  double temperature = 0.0;
  int max_tokens = 4096;
  std::optional<std::int64_t> seed;
};

struct RolloutProvenance {
  std::string model_id;
  SamplingParams sampling;
  std::string timestamp;  // ISO 8601 UTC
  std::vector<std::int64_t> failed_prompt_ids;  // skipped, in input order
};

struct ScoredResponse {
  std::string trace_text;
  int reward = 0;
};

struct RolloutRecord {
  std::int64_t prompt_id = 0;
  std::string prompt_text;
  std::vector<ScoredResponse> responses;  // >= 1
};

// Collected rollouts ready for offline RL: every response carries the
// verifiable reward it earned.
struct OfflineDataset {
  RolloutProvenance provenance;
  std::vector<RolloutRecord> records;
};

struct CollectOptions {
  int k = 4;
  SamplingParams sampling;
  PromptTemplate prompt_template = PromptTemplate::standard();
  std::int64_t schema_sample_rows = 3;
  int gen_parallelism = 4;  // bounded in-flight generation requests
  ExtractionOptions extraction;
  // Provenance timestamp; current UTC time when empty. Deterministic runs
  // pass a fixed value.
  std::string timestamp;
};

// For every datapoint: render the prompt, request k generations, score each
// against the gold SQL, and append a record. Generation runs bounded-parallel
// (opts.gen_parallelism); scoring fans out on sandbox_pool; records are
// restored to input order. A datapoint whose backend request fails after
// retries, whose stub entry is missing, or whose gold SQL does not execute
// is recorded in provenance.failed_prompt_ids and skipped, not fatal.
// An unreachable backend or rejected credentials abort the run.
OfflineDataset collect_rollouts(const std::vector<Datapoint>& dps,
                                const ModelBackend& backend,
                                const DatabaseCatalog& catalog,
                                const SandboxConfig& cfg,
                                const CollectOptions& opts,
                                ThreadPool& sandbox_pool);

// JSON-lines: a {"provenance": ...} header line, then one record per line.
std::string to_jsonl(const OfflineDataset& ds);
OfflineDataset parse_offline_dataset(const std::string& jsonl_text);

// Rebuilds advantage-math groups from persisted records (re-extracting SQL
// from the stored trace texts).
std::vector<RolloutGroup> to_groups(const OfflineDataset& ds,
                                    const ExtractionOptions& opts = {});

// One {prompt, response} pair per record whose best reward reaches
// `threshold` (default: exactly-correct responses only). Among best-reward
// responses the shortest trace wins, earliest index on length ties. Records
// with no qualifying response are omitted; order follows the input. The
// returned JSON-lines text starts with the provenance header, so an empty
// dataset exports a header-only file.
std::string export_best_of_k(const OfflineDataset& ds, int threshold = 1);

std::string current_utc_timestamp();

}  // namespace sqlverify
