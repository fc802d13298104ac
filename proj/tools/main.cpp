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

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "sqlverify/commands.hpp"
#include "sqlverify/errors.hpp"
#include "sqlverify/version.hpp"

namespace {

using sqlverify::RunConfig;

void add_sandbox_flags(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--timeout-ms", cfg.sandbox.timeout_ms,
                  "Per-statement execution timeout in milliseconds");
  sub->add_option("--max-rows", cfg.sandbox.max_rows,
                  "Result row cap per statement");
}

void add_sampling_flags(CLI::App* sub, RunConfig& cfg, std::int64_t& seed,
                        CLI::Option*& seed_opt) {
  sub->add_option("--temperature", cfg.sampling.temperature, "Sampling temperature");
  sub->add_option("--max-tokens", cfg.sampling.max_tokens, "Completion token limit");
  seed_opt = sub->add_option("--seed", seed, "Sampling seed, recorded in provenance");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Verifiable-reward engine and evaluation harness for text-to-SQL"};
  app.require_subcommand(1);
  app.set_version_flag("--version", sqlverify::kVersion);

  RunConfig cfg;

  // The config file is applied before flag parsing so explicit flags win.
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string(argv[i]) == "--config") {
      try {
        sqlverify::apply_config_file(cfg, argv[i + 1]);
      } catch (const sqlverify::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return sqlverify::kExitUsage;
      }
    }
  }

  std::int64_t seed = 0;
  CLI::Option* seed_opt = nullptr;
  int rc = sqlverify::kExitOk;
  std::string config_path;  // consumed by the prescan; accepted here so
                            // CLI11 does not reject the flag

  auto* validate = app.add_subcommand(
      "validate-data", "Check a split file and database catalog against the "
                       "dataset invariants");
  validate->add_option("--config", config_path, "JSON config file");
  validate->add_option("--split", cfg.split_path, "BIRD-format split JSON file");
  validate->add_option("--db-root", cfg.db_root, "Database catalog root");
  validate->callback(
      [&] { rc = sqlverify::run_validate_data(cfg, std::cout, std::cerr); });

  auto* evaluate = app.add_subcommand(
      "evaluate", "Score a file of traces against a split and report accuracy");
  evaluate->add_option("--config", config_path, "JSON config file");
  evaluate->add_option("--split", cfg.split_path, "BIRD-format split JSON file");
  evaluate->add_option("--db-root", cfg.db_root, "Database catalog root");
  evaluate->add_option("--traces", cfg.traces_path,
                       "JSONL of {question_id, trace_text}, aligned with the split");
  evaluate->add_option("--out", cfg.out_path, "Write per-item records here");
  evaluate->add_option("--pool", cfg.pool_size, "Sandbox worker count");
  evaluate->add_flag("--csv", cfg.csv, "Emit the report as one-row CSV");
  evaluate->add_flag("--permissive", cfg.permissive_extraction,
                     "Accept fence-free SQL output");
  add_sandbox_flags(evaluate, cfg);
  evaluate->callback(
      [&] { rc = sqlverify::run_evaluate(cfg, std::cout, std::cerr); });

  auto* score = app.add_subcommand("score",
                                   "Score one candidate against one gold SQL");
  score->add_option("--config", config_path, "JSON config file");
  score->add_option("--db-root", cfg.db_root, "Database catalog root");
  score->add_option("--db", cfg.db_id, "Database id");
  score->add_option("--gold", cfg.gold_sql, "Gold SQL");
  score->add_option("--sql", cfg.sql, "Bare candidate SQL");
  score->add_option("--trace", cfg.trace_text, "Full model trace text");
  score->add_flag("--permissive", cfg.permissive_extraction,
                  "Accept fence-free SQL output");
  add_sandbox_flags(score, cfg);
  score->callback([&] { rc = sqlverify::run_score(cfg, std::cout, std::cerr); });

  auto* select = app.add_subcommand(
      "select", "Pick one of k candidates by execution-equivalence majority vote");
  select->add_option("--config", config_path, "JSON config file");
  select->add_option("--db-root", cfg.db_root, "Database catalog root");
  select->add_option("--db", cfg.db_id, "Database id");
  select->add_option("--candidates", cfg.candidates_path,
                     "JSONL of {index, trace_text}");
  select->add_option("--pool", cfg.pool_size, "Sandbox worker count");
  select->add_flag("--permissive", cfg.permissive_extraction,
                   "Accept fence-free SQL output");
  add_sandbox_flags(select, cfg);
  select->callback([&] { rc = sqlverify::run_select(cfg, std::cout, std::cerr); });

  auto* collect = app.add_subcommand(
      "collect", "Sample k responses per datapoint and score them into a "
                 "rollout dataset");
  collect->add_option("--config", config_path, "JSON config file");
  collect->add_option("--split", cfg.split_path, "BIRD-format split JSON file");
  collect->add_option("--db-root", cfg.db_root, "Database catalog root");
  collect->add_option("--backend", cfg.backend_spec,
                      "stub:<script.json> or an http(s) chat-completions base URL");
  collect->add_option("--model", cfg.model_id, "Remote model id");
  collect->add_option("--k", cfg.k, "Responses per prompt");
  collect->add_option("--out", cfg.out_path, "Rollout JSONL output path");
  collect->add_option("--pool", cfg.pool_size, "Sandbox worker count");
  collect->add_option("--gen-parallelism", cfg.gen_parallelism,
                      "Concurrent generation requests");
  collect->add_option("--sample-rows", cfg.schema_sample_rows,
                      "Sample rows per table in the prompt schema");
  collect->add_flag("--permissive", cfg.permissive_extraction,
                    "Accept fence-free SQL output");
  CLI::Option* collect_seed = nullptr;
  add_sampling_flags(collect, cfg, seed, collect_seed);
  add_sandbox_flags(collect, cfg);
  collect->callback([&] {
    if (collect_seed->count() > 0) cfg.sampling.seed = seed;
    rc = sqlverify::run_collect(cfg, std::cout, std::cerr);
  });

  auto* advantages = app.add_subcommand(
      "advantages", "Group-relative advantages for a rollout dataset");
  advantages->add_option("--config", config_path, "JSON config file");
  advantages->add_option("--in", cfg.in_path, "Rollout JSONL input");
  advantages->add_option("--out", cfg.out_path, "Advantage JSONL output");
  advantages->add_option("--eps", cfg.advantage_eps,
                         "Denominator epsilon for the normalization");
  advantages->add_flag("--keep-saturated", cfg.keep_saturated,
                       "Keep zero-variance groups instead of dropping them");
  advantages->callback(
      [&] { rc = sqlverify::run_advantages(cfg, std::cout, std::cerr); });

  auto* export_sft = app.add_subcommand(
      "export-sft", "Export the best response per prompt as {prompt, response} "
                    "pairs");
  export_sft->add_option("--config", config_path, "JSON config file");
  export_sft->add_option("--in", cfg.in_path, "Rollout JSONL input");
  export_sft->add_option("--out", cfg.out_path, "Pair JSONL output");
  export_sft->add_option("--threshold", cfg.sft_threshold,
                         "Minimum best reward a record needs to be exported");
  export_sft->callback(
      [&] { rc = sqlverify::run_export_sft(cfg, std::cout, std::cerr); });

  auto* pipeline = app.add_subcommand(
      "pipeline", "Generate n candidates per datapoint, vote, score the "
                  "selection, and report");
  pipeline->add_option("--config", config_path, "JSON config file");
  pipeline->add_option("--split", cfg.split_path, "BIRD-format split JSON file");
  pipeline->add_option("--db-root", cfg.db_root, "Database catalog root");
  pipeline->add_option("--backend", cfg.backend_spec,
                       "stub:<script.json> or an http(s) chat-completions base URL");
  pipeline->add_option("--model", cfg.model_id, "Remote model id");
  pipeline->add_option("--n", cfg.n, "Candidates per datapoint");
  pipeline->add_option("--out", cfg.out_path,
                       "Per-datapoint selection JSONL output");
  pipeline->add_option("--pool", cfg.pool_size, "Sandbox worker count");
  pipeline->add_option("--sample-rows", cfg.schema_sample_rows,
                       "Sample rows per table in the prompt schema");
  pipeline->add_flag("--csv", cfg.csv, "Emit the report as one-row CSV");
  pipeline->add_flag("--permissive", cfg.permissive_extraction,
                     "Accept fence-free SQL output");
  CLI::Option* pipeline_seed = nullptr;
  add_sampling_flags(pipeline, cfg, seed, pipeline_seed);
  add_sandbox_flags(pipeline, cfg);
  pipeline->callback([&] {
    if (pipeline_seed->count() > 0) cfg.sampling.seed = seed;
    rc = sqlverify::run_pipeline(cfg, std::cout, std::cerr);
  });

  auto* serve = app.add_subcommand("serve", "Run the HTTP scoring service");
  serve->add_option("--config", config_path, "JSON config file");
  serve->add_option("--db-root", cfg.db_root, "Database catalog root");
  serve->add_option("--host", cfg.host, "Bind address");
  serve->add_option("--port", cfg.port, "Port (0 picks an ephemeral port)");
  serve->add_option("--pool", cfg.pool_size, "Sandbox worker count");
  serve->add_option("--max-batch", cfg.max_batch, "score_batch size limit");
  serve->add_option("--queue", cfg.queue_depth,
                    "Admitted requests beyond the pool before 429");
  add_sandbox_flags(serve, cfg);
  serve->callback([&] { rc = sqlverify::run_serve(cfg, std::cout, std::cerr); });

  auto* fixtures = app.add_subcommand(
      "make-fixtures", "Write the bundled demo benchmark and stub scripts");
  fixtures->add_option("--config", config_path, "JSON config file");
  fixtures->add_option("--dir", cfg.fixtures_dir, "Output directory");
  fixtures->callback(
      [&] { rc = sqlverify::run_make_fixtures(cfg, std::cout, std::cerr); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return sqlverify::kExitUsage;
  }
  return rc;
}
