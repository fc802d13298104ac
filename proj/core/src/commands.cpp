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

#include "sqlverify/commands.hpp"

#include <condition_variable>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "sqlverify/dataset.hpp"
#include "sqlverify/demo.hpp"
#include "sqlverify/digest.hpp"
#include "sqlverify/errors.hpp"
#include "sqlverify/modelclient.hpp"
#include "sqlverify/reward.hpp"
#include "sqlverify/selfconsistency.hpp"
#include "sqlverify/service.hpp"
#include "sqlverify/trace.hpp"
#include "sqlverify/version.hpp"

using nlohmann::json;

namespace sqlverify {

namespace {

constexpr const char* kEpochTimestamp = "1970-01-01T00:00:00Z";

std::string read_file_or_throw(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file_or_throw(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write file: " + path);
  out << text;
}

json config_to_json(const RunConfig& cfg) {
  json j;
  j["db_root"] = cfg.db_root;
  j["split"] = cfg.split_path;
  j["traces"] = cfg.traces_path;
  j["candidates"] = cfg.candidates_path;
  j["in"] = cfg.in_path;
  j["out"] = cfg.out_path;
  j["backend"] = cfg.backend_spec;
  j["model"] = cfg.model_id;
  j["timeout_ms"] = cfg.sandbox.timeout_ms;
  j["max_rows"] = cfg.sandbox.max_rows;
  j["temperature"] = cfg.sampling.temperature;
  j["max_tokens"] = cfg.sampling.max_tokens;
  j["seed"] = cfg.sampling.seed ? json(*cfg.sampling.seed) : json(nullptr);
  j["k"] = cfg.k;
  j["n"] = cfg.n;
  j["eps"] = cfg.advantage_eps;
  j["keep_saturated"] = cfg.keep_saturated;
  j["threshold"] = cfg.sft_threshold;
  j["pool"] = cfg.pool_size;
  j["gen_parallelism"] = cfg.gen_parallelism;
  j["sample_rows"] = cfg.schema_sample_rows;
  j["permissive_extraction"] = cfg.permissive_extraction;
  j["csv"] = cfg.csv;
  j["db"] = cfg.db_id;
  j["gold"] = cfg.gold_sql;
  j["sql"] = cfg.sql;
  j["trace"] = cfg.trace_text;
  j["host"] = cfg.host;
  j["port"] = cfg.port;
  j["max_batch"] = cfg.max_batch;
  j["queue"] = cfg.queue_depth;
  j["fixtures_dir"] = cfg.fixtures_dir;
  return j;
}

std::string provenance_line(const RunConfig& cfg) {
  json p;
  p["tool"] = "sqlverify";
  p["version"] = kVersion;
  p["config_digest"] = cfg.config_digest();
  p["seed"] = cfg.sampling.seed ? json(*cfg.sampling.seed) : json(nullptr);
  return json{{"provenance", p}}.dump();
}

// Folds the tool fields into the {"provenance": ...} header line that
// rlcore serialization already emits.
std::string augment_provenance_header(const std::string& jsonl_text,
                                      const RunConfig& cfg) {
  std::size_t eol = jsonl_text.find('\n');
  if (eol == std::string::npos) return jsonl_text;
  json header = json::parse(jsonl_text.substr(0, eol));
  if (header.contains("provenance")) {
    header["provenance"]["tool"] = "sqlverify";
    header["provenance"]["version"] = kVersion;
    header["provenance"]["config_digest"] = cfg.config_digest();
  }
  return header.dump() + jsonl_text.substr(eol);
}

void require(bool condition, const std::string& message) {
  if (!condition) throw UsageError(message);
}

ExtractionOptions extraction_options(const RunConfig& cfg) {
  ExtractionOptions opts;
  opts.permissive = cfg.permissive_extraction;
  return opts;
}

std::vector<GenerationTrace> load_traces_file(const RunConfig& cfg,
                                              const std::vector<Datapoint>& dps) {
  const std::string text = read_file_or_throw(cfg.traces_path);
  std::istringstream in(text);
  std::string line;
  std::vector<GenerationTrace> traces;
  std::vector<std::optional<std::int64_t>> ids;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError("traces file line " + std::to_string(line_no) + ": " +
                           e.what(),
                       e.byte);
    }
    if (j.contains("provenance")) continue;
    if (!j.contains("trace_text") || !j["trace_text"].is_string()) {
      throw UsageError("traces file line " + std::to_string(line_no) +
                       ": expected {\"trace_text\": ...}");
    }
    traces.push_back(GenerationTrace::from_text(j["trace_text"].get<std::string>(),
                                                extraction_options(cfg)));
    if (j.contains("question_id") && j["question_id"].is_number_integer()) {
      ids.push_back(j["question_id"].get<std::int64_t>());
    } else {
      ids.push_back(std::nullopt);
    }
  }
  if (traces.size() != dps.size()) {
    throw UsageError("traces file has " + std::to_string(traces.size()) +
                     " traces but split has " + std::to_string(dps.size()) +
                     " datapoints");
  }
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] && *ids[i] != dps[i].question_id) {
      throw UsageError("traces file is misaligned at line for question_id " +
                       std::to_string(*ids[i]) + " (split has " +
                       std::to_string(dps[i].question_id) + " at position " +
                       std::to_string(i) + ")");
    }
  }
  return traces;
}

int map_error_to_exit(const Error& e, std::ostream& err) {
  err << "error: " << e.what() << "\n";
  if (dynamic_cast<const BackendError*>(&e)) return kExitBackendFailure;
  if (dynamic_cast<const UsageError*>(&e)) return kExitUsage;
  if (dynamic_cast<const ValidationError*>(&e)) return kExitDataIssues;
  if (dynamic_cast<const ParseError*>(&e)) return kExitDataIssues;
  if (dynamic_cast<const GoldExecutionError*>(&e)) return kExitDataIssues;
  return kExitUsage;  // IoError, InternalError, anything else
}

bool is_stub_spec(const std::string& backend_spec) {
  return backend_spec.rfind("stub:", 0) == 0;
}

}  // namespace

std::string RunConfig::config_digest() const {
  return fnv1a64_hex(config_to_json(*this).dump());
}

void apply_config_file(RunConfig& cfg, const std::string& path) {
  json doc;
  try {
    doc = json::parse(read_file_or_throw(path));
  } catch (const json::parse_error& e) {
    throw UsageError("config file " + path + ": " + e.what());
  }
  if (!doc.is_object()) throw UsageError("config file must be a JSON object");

  for (const auto& [key, value] : doc.items()) {
    try {
      if (key == "db_root") cfg.db_root = value.get<std::string>();
      else if (key == "split") cfg.split_path = value.get<std::string>();
      else if (key == "traces") cfg.traces_path = value.get<std::string>();
      else if (key == "candidates") cfg.candidates_path = value.get<std::string>();
      else if (key == "in") cfg.in_path = value.get<std::string>();
      else if (key == "out") cfg.out_path = value.get<std::string>();
      else if (key == "backend") cfg.backend_spec = value.get<std::string>();
      else if (key == "model") cfg.model_id = value.get<std::string>();
      else if (key == "timeout_ms") cfg.sandbox.timeout_ms = value.get<std::int64_t>();
      else if (key == "max_rows") cfg.sandbox.max_rows = value.get<std::int64_t>();
      else if (key == "temperature") cfg.sampling.temperature = value.get<double>();
      else if (key == "max_tokens") cfg.sampling.max_tokens = value.get<int>();
      else if (key == "seed") {
        if (!value.is_null()) cfg.sampling.seed = value.get<std::int64_t>();
      } else if (key == "k") cfg.k = value.get<int>();
      else if (key == "n") cfg.n = value.get<int>();
      else if (key == "eps") cfg.advantage_eps = value.get<double>();
      else if (key == "keep_saturated") cfg.keep_saturated = value.get<bool>();
      else if (key == "threshold") cfg.sft_threshold = value.get<int>();
      else if (key == "pool") cfg.pool_size = value.get<int>();
      else if (key == "gen_parallelism") cfg.gen_parallelism = value.get<int>();
      else if (key == "sample_rows") cfg.schema_sample_rows = value.get<std::int64_t>();
      else if (key == "permissive_extraction") cfg.permissive_extraction = value.get<bool>();
      else if (key == "csv") cfg.csv = value.get<bool>();
      else if (key == "db") cfg.db_id = value.get<std::string>();
      else if (key == "gold") cfg.gold_sql = value.get<std::string>();
      else if (key == "sql") cfg.sql = value.get<std::string>();
      else if (key == "trace") cfg.trace_text = value.get<std::string>();
      else if (key == "host") cfg.host = value.get<std::string>();
      else if (key == "port") cfg.port = value.get<int>();
      else if (key == "max_batch") cfg.max_batch = value.get<int>();
      else if (key == "queue") cfg.queue_depth = value.get<int>();
      else if (key == "fixtures_dir") cfg.fixtures_dir = value.get<std::string>();
      else throw UsageError("config file key \"" + key + "\" is not recognized");
    } catch (const json::exception& e) {
      throw UsageError("config file key \"" + key + "\": " + e.what());
    }
  }
}

int run_validate_data(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    require(!cfg.db_root.empty(), "--db-root is required");
    require(!cfg.split_path.empty(), "--split is required");
    DatabaseCatalog catalog = DatabaseCatalog::discover(cfg.db_root);
    catalog.validate();
    std::vector<Datapoint> dps = load_split(cfg.split_path, catalog);
    out << json{{"status", "ok"},
                {"datapoints", dps.size()},
                {"databases", catalog.entries().size()}}
               .dump()
        << "\n";
    return kExitOk;
  } catch (const ValidationError& e) {
    for (const auto& issue : e.issues()) err << issue << "\n";
    return kExitDataIssues;
  } catch (const Error& e) {
    return map_error_to_exit(e, err);
  }
}

int run_evaluate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    require(!cfg.db_root.empty(), "--db-root is required");
    require(!cfg.split_path.empty(), "--split is required");
    require(!cfg.traces_path.empty(), "--traces is required");

    DatabaseCatalog catalog = DatabaseCatalog::discover(cfg.db_root);
    std::vector<Datapoint> dps = load_split(cfg.split_path, catalog);
    std::vector<GenerationTrace> traces = load_traces_file(cfg, dps);

    ThreadPool pool(static_cast<std::size_t>(cfg.pool_size));
    SplitEvaluation eval = evaluate_split(dps, traces, catalog, cfg.sandbox, pool);

    if (!cfg.out_path.empty()) {
      std::string text = provenance_line(cfg) + "\n";
      for (const auto& item : eval.items) text += to_json_string(item) + "\n";
      write_file_or_throw(cfg.out_path, text);
    }
    if (cfg.csv) {
      out << to_csv(eval.report);
    } else {
      out << to_json_string(eval.report) << "\n";
    }
    if (eval.report.n_gold_failures > 0) {
      err << "warning: " << eval.report.n_gold_failures
          << " datapoint(s) have non-executable gold SQL; excluded from accuracy\n";
      return kExitDataIssues;
    }
    return kExitOk;
  } catch (const Error& e) {
    return map_error_to_exit(e, err);
  }
}

int run_score(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    require(!cfg.db_root.empty(), "--db-root is required");
    require(!cfg.db_id.empty(), "--db is required");
    require(!cfg.gold_sql.empty(), "--gold is required");
    require(cfg.sql.empty() != cfg.trace_text.empty(),
            "exactly one of --sql / --trace is required");

    DatabaseCatalog catalog = DatabaseCatalog::discover(cfg.db_root);
    Datapoint dp;
    dp.db_id = cfg.db_id;
    dp.question = "(cli score)";
    dp.gold_sql = cfg.gold_sql;

    GenerationTrace trace =
        !cfg.sql.empty()
            ? GenerationTrace::from_sql(cfg.sql)
            : GenerationTrace::from_text(cfg.trace_text, extraction_options(cfg));
    RewardRecord rec = score(dp, trace, catalog.resolve(cfg.db_id), cfg.sandbox);
    out << to_json_string(rec) << "\n";
    return kExitOk;
  } catch (const Error& e) {
    return map_error_to_exit(e, err);
  }
}

int run_select(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    require(!cfg.db_root.empty(), "--db-root is required");
    require(!cfg.db_id.empty(), "--db is required");
    require(!cfg.candidates_path.empty(), "--candidates is required");

    DatabaseCatalog catalog = DatabaseCatalog::discover(cfg.db_root);
    const std::string text = read_file_or_throw(cfg.candidates_path);
    std::istringstream in(text);
    std::string line;
    std::vector<GenerationTrace> candidates;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      json j;
      try {
        j = json::parse(line);
      } catch (const json::parse_error& e) {
        throw ParseError("candidates file line " + std::to_string(line_no) +
                             ": " + e.what(),
                         e.byte);
      }
      if (j.contains("provenance")) continue;
      if (!j.contains("trace_text") || !j["trace_text"].is_string()) {
        throw UsageError("candidates file line " + std::to_string(line_no) +
                         ": expected {\"trace_text\": ...}");
      }
      candidates.push_back(GenerationTrace::from_text(
          j["trace_text"].get<std::string>(), extraction_options(cfg)));
    }
    require(!candidates.empty(), "candidates file is empty");

    ThreadPool pool(static_cast<std::size_t>(cfg.pool_size));
    SelectionResult selection =
        select(candidates, catalog.resolve(cfg.db_id), cfg.sandbox, pool);
    out << to_json_string(selection) << "\n";
    return kExitOk;
  } catch (const Error& e) {
    return map_error_to_exit(e, err);
  }
}

int run_collect(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    require(!cfg.db_root.empty(), "--db-root is required");
    require(!cfg.split_path.empty(), "--split is required");
    require(!cfg.backend_spec.empty(), "--backend is required");
    require(!cfg.out_path.empty(), "--out is required");

    DatabaseCatalog catalog = DatabaseCatalog::discover(cfg.db_root);
    std::vector<Datapoint> dps = load_split(cfg.split_path, catalog);
    ModelBackend backend = make_backend_from_spec(cfg.backend_spec, cfg.model_id);

    CollectOptions opts;
    opts.k = cfg.k;
    opts.sampling = cfg.sampling;
    opts.schema_sample_rows = cfg.schema_sample_rows;
    opts.gen_parallelism = cfg.gen_parallelism;
    opts.extraction = extraction_options(cfg);
    // Stub runs are hermetic; wall-clock provenance would break their
    // byte-for-byte reproducibility.
    opts.timestamp = is_stub_spec(cfg.backend_spec) ? kEpochTimestamp : "";

    ThreadPool sandbox_pool(static_cast<std::size_t>(cfg.pool_size));
    OfflineDataset ds =
        collect_rollouts(dps, backend, catalog, cfg.sandbox, opts, sandbox_pool);

    write_file_or_throw(cfg.out_path,
                        augment_provenance_header(to_jsonl(ds), cfg));
    out << json{{"records", ds.records.size()},
                {"failed_prompt_ids", ds.provenance.failed_prompt_ids},
                {"out", cfg.out_path}}
               .dump()
        << "\n";
    return ds.provenance.failed_prompt_ids.empty() ? kExitOk : kExitDataIssues;
  } catch (const Error& e) {
    return map_error_to_exit(e, err);
  }
}

int run_advantages(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    require(!cfg.in_path.empty(), "--in is required");

    OfflineDataset ds = parse_offline_dataset(read_file_or_throw(cfg.in_path));
    std::vector<RolloutGroup> groups = to_groups(ds, extraction_options(cfg));
    if (!cfg.keep_saturated) groups = filter_saturated(std::move(groups));

    std::string text = provenance_line(cfg) + "\n";
    for (const auto& group : groups) {
      AdvantageVector adv = group_advantages(group.rewards, cfg.advantage_eps);
      json line{{"prompt_id", group.prompt_id},
                {"rewards", group.rewards},
                {"advantages", adv.values},
                {"group_mean", adv.group_mean},
                {"group_std", adv.group_std}};
      text += line.dump() + "\n";
    }
    if (cfg.out_path.empty()) {
      out << text;
    } else {
      write_file_or_throw(cfg.out_path, text);
      out << json{{"groups", groups.size()}, {"out", cfg.out_path}}.dump() << "\n";
    }
    return kExitOk;
  } catch (const Error& e) {
    return map_error_to_exit(e, err);
  }
}

int run_export_sft(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    require(!cfg.in_path.empty(), "--in is required");

    OfflineDataset ds = parse_offline_dataset(read_file_or_throw(cfg.in_path));
    const std::string text =
        augment_provenance_header(export_best_of_k(ds, cfg.sft_threshold), cfg);
    if (cfg.out_path.empty()) {
      out << text;
    } else {
      write_file_or_throw(cfg.out_path, text);
      out << json{{"records", ds.records.size()}, {"out", cfg.out_path}}.dump()
          << "\n";
    }
    return kExitOk;
  } catch (const Error& e) {
    return map_error_to_exit(e, err);
  }
}

int run_pipeline(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    require(!cfg.db_root.empty(), "--db-root is required");
    require(!cfg.split_path.empty(), "--split is required");
    require(!cfg.backend_spec.empty(), "--backend is required");
    require(cfg.n >= 1, "--n must be >= 1");

    DatabaseCatalog catalog = DatabaseCatalog::discover(cfg.db_root);
    std::vector<Datapoint> dps = load_split(cfg.split_path, catalog);
    ModelBackend backend = make_backend_from_spec(cfg.backend_spec, cfg.model_id);
    backend.check_reachable();

    ThreadPool pool(static_cast<std::size_t>(cfg.pool_size));
    const PromptTemplate tpl = PromptTemplate::standard();
    std::map<std::string, SchemaDescription> schemas;

    SplitReport report;
    report.n = static_cast<std::int64_t>(dps.size());
    std::string lines;
    for (const auto& dp : dps) {
      const std::string& db_path = catalog.resolve(dp.db_id);
      auto schema_it = schemas.find(dp.db_id);
      if (schema_it == schemas.end()) {
        schema_it = schemas
                        .emplace(dp.db_id,
                                 describe_schema(db_path, cfg.schema_sample_rows))
                        .first;
      }

      GenerationRequest req;
      req.prompt = render_prompt(dp, schema_it->second, tpl);
      req.n = cfg.n;
      req.temperature = cfg.sampling.temperature;
      req.max_tokens = cfg.sampling.max_tokens;
      req.seed = cfg.sampling.seed;
      std::vector<GenerationTrace> candidates =
          backend.generate(req, extraction_options(cfg));

      SelectionResult selection = select(candidates, db_path, cfg.sandbox, pool);

      json line;
      line["question_id"] = dp.question_id;
      line["chosen_index"] = selection.chosen_index;
      try {
        RewardRecord rec =
            score(dp, candidates[selection.chosen_index], db_path, cfg.sandbox);
        line["reward"] = rec.reward;
        if (rec.reward == 1) ++report.n_correct;
        if (rec.reward == -1) ++report.n_invalid;
      } catch (const GoldExecutionError&) {
        line["reward"] = 0;
        line["gold_failed"] = true;
        ++report.n_gold_failures;
      }
      lines += line.dump() + "\n";
    }
    report.accuracy_percent = accuracy_percent_value(
        report.n_correct, report.n - report.n_gold_failures);

    if (!cfg.out_path.empty()) {
      write_file_or_throw(cfg.out_path, provenance_line(cfg) + "\n" + lines);
    }
    if (cfg.csv) {
      out << to_csv(report);
    } else {
      out << to_json_string(report) << "\n";
    }
    if (report.n_gold_failures > 0) {
      err << "warning: " << report.n_gold_failures
          << " datapoint(s) have non-executable gold SQL; excluded from accuracy\n";
      return kExitDataIssues;
    }
    return kExitOk;
  } catch (const Error& e) {
    return map_error_to_exit(e, err);
  }
}

int run_make_fixtures(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    require(!cfg.fixtures_dir.empty(), "--dir is required");
    DemoBenchmark bench = write_demo_benchmark(cfg.fixtures_dir);
    const std::string gold_script = cfg.fixtures_dir + "/stub_gold.json";
    const std::string mixed_script = cfg.fixtures_dir + "/stub_mixed.json";
    write_demo_stub_script(gold_script, bench.db_root, bench.split_path, {});
    // One wrong-majority datapoint out of 25 demonstrates a non-trivial vote.
    write_demo_stub_script(mixed_script, bench.db_root, bench.split_path, {16});
    out << json{{"db_root", bench.db_root},
                {"split", bench.split_path},
                {"stub_gold", gold_script},
                {"stub_mixed", mixed_script}}
               .dump()
        << "\n";
    return kExitOk;
  } catch (const Error& e) {
    return map_error_to_exit(e, err);
  }
}

int run_serve(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    require(!cfg.db_root.empty(), "--db-root is required");

    ServiceConfig service_cfg;
    service_cfg.db_root = cfg.db_root;
    service_cfg.host = cfg.host;
    service_cfg.port = cfg.port;
    service_cfg.pool_size = cfg.pool_size;
    service_cfg.queue_depth = cfg.queue_depth;
    service_cfg.max_batch = cfg.max_batch;
    service_cfg.sandbox = cfg.sandbox;

    ScoreService service(std::move(service_cfg));
    service.start();
    service.mark_ready();
    out << json{{"listening", true},
                {"port", service.port()},
                {"catalog_dbs", service.catalog_size()}}
               .dump()
        << "\n"
        << std::flush;

    // Serve until the process is terminated.
    std::mutex mu;
    std::condition_variable cv;
    std::unique_lock<std::mutex> lock(mu);
    cv.wait(lock, [] { return false; });
    return kExitOk;
  } catch (const Error& e) {
    return map_error_to_exit(e, err);
  }
}

}  // namespace sqlverify
