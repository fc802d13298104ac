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

#include "sqlverify/selfconsistency.hpp"

#include <algorithm>
#include <future>
#include <map>

#include "json.hpp"
#include "sqlverify/errors.hpp"

using nlohmann::json;

namespace sqlverify {

ClusterResult cluster_by_execution(const std::vector<GenerationTrace>& candidates,
                                   const std::string& db_path,
                                   const SandboxConfig& cfg, ThreadPool& pool) {
  if (candidates.empty()) {
    throw UsageError("candidate list must be non-empty");
  }

  std::vector<std::future<std::optional<ExecutionOutcome>>> futures;
  futures.reserve(candidates.size());
  for (const auto& candidate : candidates) {
    futures.push_back(pool.submit([&candidate, &db_path, &cfg]()
                                      -> std::optional<ExecutionOutcome> {
      if (candidate.extraction_status == ExtractionStatus::kNotFound) {
        return std::nullopt;
      }
      return execute(db_path, *candidate.extracted_sql, cfg);
    }));
  }

  ClusterResult result;
  result.outcomes.resize(candidates.size());
  std::map<CanonicalResultSet, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < futures.size(); ++i) {
    auto outcome = futures[i].get();
    if (outcome && outcome->ok()) {
      groups[*outcome->rows].push_back(i);
      result.outcomes[i] = {std::move(outcome), true};
    } else {
      ++result.n_failed;
      result.outcomes[i] = {std::move(outcome), false};
    }
  }

  for (auto& [key, members] : groups) {
    Cluster cluster;
    cluster.key = key;
    cluster.member_indices = std::move(members);  // ascending by construction
    cluster.weight = static_cast<double>(cluster.member_indices.size());
    result.clusters.push_back(std::move(cluster));
  }
  std::sort(result.clusters.begin(), result.clusters.end(),
            [](const Cluster& a, const Cluster& b) {
              if (a.weight != b.weight) return a.weight > b.weight;
              return a.member_indices.front() < b.member_indices.front();
            });
  return result;
}

SelectionResult select(const std::vector<GenerationTrace>& candidates,
                       const std::string& db_path, const SandboxConfig& cfg,
                       ThreadPool& pool) {
  ClusterResult clustered = cluster_by_execution(candidates, db_path, cfg, pool);

  SelectionResult result;
  result.clusters = std::move(clustered.clusters);
  result.outcomes = std::move(clustered.outcomes);
  result.n_failed = clustered.n_failed;
  result.chosen_index =
      result.clusters.empty() ? 0 : result.clusters.front().member_indices.front();
  return result;
}

std::string to_json_string(const SelectionResult& result) {
  json clusters = json::array();
  for (const auto& cluster : result.clusters) {
    clusters.push_back(
        {{"weight", cluster.weight}, {"members", cluster.member_indices}});
  }
  json status = json::array();
  for (const auto& outcome : result.outcomes) {
    status.push_back(outcome.outcome ? to_string(outcome.outcome->status)
                                     : "extraction_failed");
  }
  json j;
  j["chosen_index"] = result.chosen_index;
  j["n_failed"] = result.n_failed;
  j["clusters"] = clusters;
  j["candidate_status"] = status;
  return j.dump();
}

}  // namespace sqlverify
