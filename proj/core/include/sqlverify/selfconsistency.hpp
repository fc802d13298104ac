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

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "sqlverify/sqlexec.hpp"
#include "sqlverify/thread_pool.hpp"
#include "sqlverify/trace.hpp"

namespace sqlverify {

// An execution-equivalence class of candidates: every member produced the
// same canonical result set. Weights are uniform (1.0 per member), the
// parameter-free choice, so "weighted majority" reduces to cardinality.
struct Cluster {
  CanonicalResultSet key;
  std::vector<std::size_t> member_indices;  // strictly ascending
  double weight = 0.0;
};

// Execution outcome per candidate; `outcome` is absent when no SQL could be
// extracted from the trace.
struct CandidateOutcome {
  std::optional<ExecutionOutcome> outcome;
  bool counted = false;  // joined a cluster
};

struct ClusterResult {
  std::vector<Cluster> clusters;  // weight desc, then earliest member asc
  std::vector<CandidateOutcome> outcomes;
  std::size_t n_failed = 0;  // candidates excluded for non-success execution
};

struct SelectionResult {
  std::size_t chosen_index = 0;
  std::vector<Cluster> clusters;
  std::vector<CandidateOutcome> outcomes;
  std::size_t n_failed = 0;
};

// Executes every candidate against the database (concurrently on `pool`)
// and groups the successful ones by canonical result set.
ClusterResult cluster_by_execution(const std::vector<GenerationTrace>& candidates,
                                   const std::string& db_path,
                                   const SandboxConfig& cfg, ThreadPool& pool);

// Weighted majority vote over execution-equivalence clusters. The winning
// cluster is the heaviest; ties go to the cluster containing the
// earliest-generated candidate, and within the winning cluster the earliest
// member is chosen. When every candidate fails, falls back to candidate 0 so
// the harness always emits an answer. Throws UsageError on an empty list.
SelectionResult select(const std::vector<GenerationTrace>& candidates,
                       const std::string& db_path, const SandboxConfig& cfg,
                       ThreadPool& pool);

// {chosen_index, n_failed, clusters:[{weight, members}], candidate_status}.
std::string to_json_string(const SelectionResult& result);

}  // namespace sqlverify
