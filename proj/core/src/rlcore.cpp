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

#include "sqlverify/rlcore.hpp"

#include <algorithm>
#include <cmath>
#include <ctime>
#include <future>
#include <map>
#include <sstream>

#include "json.hpp"
#include "sqlverify/errors.hpp"

using nlohmann::json;

namespace sqlverify {

AdvantageVector group_advantages(const std::vector<double>& rewards, double eps) {
  if (rewards.empty()) throw UsageError("advantage group must be non-empty");
  if (eps <= 0.0) throw UsageError("advantage eps must be positive");

  AdvantageVector out;
  const double k = static_cast<double>(rewards.size());
  double sum = 0.0;
  for (double r : rewards) sum += r;
  out.group_mean = sum / k;

  double sq = 0.0;
  for (double r : rewards) {
    const double d = r - out.group_mean;
    sq += d * d;
  }
  out.group_std = std::sqrt(sq / k);

  out.values.reserve(rewards.size());
  for (double r : rewards) {
    out.values.push_back((r - out.group_mean) / (out.group_std + eps));
  }
  return out;
}

std::vector<RolloutGroup> filter_saturated(std::vector<RolloutGroup> groups) {
  std::vector<RolloutGroup> kept;
  kept.reserve(groups.size());
  for (auto& group : groups) {
    const bool uniform =
        std::all_of(group.rewards.begin(), group.rewards.end(),
                    [&](double r) { return r == group.rewards.front(); });
    if (!group.rewards.empty() && !uniform) kept.push_back(std::move(group));
  }
  return kept;
}

OfflineDataset collect_rollouts(const std::vector<Datapoint>& dps,
                                const ModelBackend& backend,
                                const DatabaseCatalog& catalog,
                                const SandboxConfig& cfg,
                                const CollectOptions& opts,
                                ThreadPool& sandbox_pool) {
  if (opts.k < 1) throw UsageError("rollout k must be >= 1");
  backend.check_reachable();

  OfflineDataset ds;
  ds.provenance.model_id = backend.model_id();
  ds.provenance.sampling = opts.sampling;
  ds.provenance.timestamp =
      opts.timestamp.empty() ? current_utc_timestamp() : opts.timestamp;

  // Stage 1: render every prompt up front, caching one schema per database.
  std::map<std::string, SchemaDescription> schemas;
  std::vector<std::string> prompts;
  prompts.reserve(dps.size());
  for (const auto& dp : dps) {
    const std::string& db_path = catalog.resolve(dp.db_id);
    auto it = schemas.find(dp.db_id);
    if (it == schemas.end()) {
      it = schemas.emplace(dp.db_id, describe_schema(db_path, opts.schema_sample_rows))
               .first;
    }
    prompts.push_back(render_prompt(dp, it->second, opts.prompt_template));
  }

  // Stages 2+3: bounded-parallel generation; each generation task fans its
  // k responses out to the sandbox pool for scoring.
  struct Slot {
    bool failed = false;
    RolloutRecord record;
  };
  std::vector<Slot> slots(dps.size());
  ThreadPool gen_pool(static_cast<std::size_t>(std::max(opts.gen_parallelism, 1)));
  std::vector<std::future<void>> pending;
  pending.reserve(dps.size());

  for (std::size_t i = 0; i < dps.size(); ++i) {
    pending.push_back(gen_pool.submit([&, i] {
      Slot& slot = slots[i];
      const Datapoint& dp = dps[i];
      try {
        GenerationRequest req;
        req.prompt = prompts[i];
        req.n = opts.k;
        req.temperature = opts.sampling.temperature;
        req.max_tokens = opts.sampling.max_tokens;
        req.seed = opts.sampling.seed;
        std::vector<GenerationTrace> traces = backend.generate(req, opts.extraction);

        const std::string& db_path = catalog.resolve(dp.db_id);
        std::vector<std::future<RewardRecord>> scores;
        scores.reserve(traces.size());
        for (const auto& trace : traces) {
          scores.push_back(sandbox_pool.submit(
              [&dp, &trace, &db_path, &cfg] { return score(dp, trace, db_path, cfg); }));
        }

        slot.record.prompt_id = dp.question_id;
        slot.record.prompt_text = prompts[i];
        for (std::size_t t = 0; t < traces.size(); ++t) {
          RewardRecord rec = scores[t].get();
          slot.record.responses.push_back({traces[t].text, rec.reward});
        }
      } catch (const CredentialError&) {
        throw;  // fatal: retrying other datapoints cannot help
      } catch (const GoldExecutionError&) {
        slot.failed = true;
      } catch (const BackendError&) {
        slot.failed = true;
      } catch (const FixtureError&) {
        slot.failed = true;
      }
    }));
  }
  for (auto& fut : pending) fut.get();

  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (slots[i].failed) {
      ds.provenance.failed_prompt_ids.push_back(dps[i].question_id);
    } else {
      ds.records.push_back(std::move(slots[i].record));
    }
  }
  return ds;
}

namespace {

json provenance_to_json(const RolloutProvenance& p) {
  json sampling;
  sampling["temperature"] = p.sampling.temperature;
  sampling["max_tokens"] = p.sampling.max_tokens;
  if (p.sampling.seed) {
    sampling["seed"] = *p.sampling.seed;
  } else {
    sampling["seed"] = nullptr;
  }
  return json{{"provenance",
               {{"model_id", p.model_id},
                {"sampling_params", sampling},
                {"timestamp", p.timestamp},
                {"failed_prompt_ids", p.failed_prompt_ids}}}};
}

RolloutProvenance provenance_from_json(const json& j) {
  RolloutProvenance p;
  const json& body = j.at("provenance");
  p.model_id = body.value("model_id", std::string{});
  p.timestamp = body.value("timestamp", std::string{});
  if (body.contains("sampling_params")) {
    const json& s = body["sampling_params"];
    p.sampling.temperature = s.value("temperature", 0.0);
    p.sampling.max_tokens = s.value("max_tokens", 0);
    if (s.contains("seed") && !s["seed"].is_null()) {
      p.sampling.seed = s["seed"].get<std::int64_t>();
    }
  }
  if (body.contains("failed_prompt_ids")) {
    p.failed_prompt_ids = body["failed_prompt_ids"].get<std::vector<std::int64_t>>();
  }
  return p;
}

}  // namespace

std::string to_jsonl(const OfflineDataset& ds) {
  std::string out = provenance_to_json(ds.provenance).dump() + "\n";
  for (const auto& record : ds.records) {
    json responses = json::array();
    for (const auto& response : record.responses) {
      responses.push_back(
          {{"trace_text", response.trace_text}, {"reward", response.reward}});
    }
    json line{{"prompt_id", record.prompt_id},
              {"prompt_text", record.prompt_text},
              {"responses", responses}};
    out += line.dump() + "\n";
  }
  return out;
}

OfflineDataset parse_offline_dataset(const std::string& jsonl_text) {
  OfflineDataset ds;
  std::istringstream in(jsonl_text);
  std::string line;
  bool saw_header = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError("rollout file line " + std::to_string(line_no) + ": " +
                           e.what(),
                       e.byte);
    }
    if (j.contains("provenance")) {
      ds.provenance = provenance_from_json(j);
      saw_header = true;
      continue;
    }
    RolloutRecord record;
    if (!j.contains("prompt_id") || !j.contains("responses") ||
        !j["responses"].is_array() || j["responses"].empty()) {
      throw ValidationError({"rollout file line " + std::to_string(line_no) +
                             ": record needs prompt_id and >= 1 responses"});
    }
    record.prompt_id = j["prompt_id"].get<std::int64_t>();
    record.prompt_text = j.value("prompt_text", std::string{});
    for (const auto& response : j["responses"]) {
      ScoredResponse sr;
      sr.trace_text = response.value("trace_text", std::string{});
      sr.reward = response.value("reward", 0);
      if (sr.reward < -1 || sr.reward > 1) {
        throw ValidationError({"rollout file line " + std::to_string(line_no) +
                               ": reward out of {-1,0,1}"});
      }
      record.responses.push_back(std::move(sr));
    }
    ds.records.push_back(std::move(record));
  }
  (void)saw_header;  // header optional on read; always written
  return ds;
}

std::vector<RolloutGroup> to_groups(const OfflineDataset& ds,
                                    const ExtractionOptions& opts) {
  std::vector<RolloutGroup> groups;
  groups.reserve(ds.records.size());
  for (const auto& record : ds.records) {
    RolloutGroup group;
    group.prompt_id = record.prompt_id;
    for (const auto& response : record.responses) {
      group.traces.push_back(GenerationTrace::from_text(response.trace_text, opts));
      group.rewards.push_back(static_cast<double>(response.reward));
    }
    groups.push_back(std::move(group));
  }
  return groups;
}

std::string export_best_of_k(const OfflineDataset& ds, int threshold) {
  std::string out = provenance_to_json(ds.provenance).dump() + "\n";
  for (const auto& record : ds.records) {
    int best_reward = -2;
    for (const auto& response : record.responses) {
      best_reward = std::max(best_reward, response.reward);
    }
    if (best_reward < threshold) continue;

    const ScoredResponse* best = nullptr;
    for (const auto& response : record.responses) {
      if (response.reward != best_reward) continue;
      if (best == nullptr ||
          response.trace_text.size() < best->trace_text.size()) {
        best = &response;
      }
    }
    json line{{"prompt", record.prompt_text}, {"response", best->trace_text}};
    out += line.dump() + "\n";
  }
  return out;
}

std::string current_utc_timestamp() {
  std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace sqlverify
