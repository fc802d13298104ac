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
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sqlverify/rlcore.hpp"
#include "sqlverify/sqlexec.hpp"

namespace sqlverify {

// Exit-code contract: scripts dispatch on these.
enum ExitCode : int {
  kExitOk = 0,
  kExitDataIssues = 1,   // validation failures, gold-execution failures
  kExitUsage = 2,        // bad flags, misaligned inputs
  kExitBackendFailure = 3,
};

// Everything a run needs, resolved up front. Loading from a JSON config
// file plus flag overrides happens in the CLI front end; commands fail fast
// on whatever is still missing.
struct RunConfig {
  std::string db_root;
  std::string split_path;
  std::string traces_path;      // evaluate: aligned trace file
  std::string candidates_path;  // select: candidate file
  std::string in_path;          // advantages / export-sft input
  std::string out_path;         // JSONL output ("" = skip / stdout)

  std::string backend_spec;  // "stub:<script.json>" or http(s) URL
  std::string model_id = "default";

  SandboxConfig sandbox;
  SamplingParams sampling;
  int k = 4;  // collect: responses per prompt
  int n = 7;  // pipeline: candidates per datapoint for the vote

  double advantage_eps = 1e-6;
  bool keep_saturated = false;
  int sft_threshold = 1;

  int pool_size = 4;
  int gen_parallelism = 4;
  std::int64_t schema_sample_rows = 3;
  bool permissive_extraction = false;
  bool csv = false;

  std::string db_id;       // score / select
  std::string gold_sql;    // score
  std::string sql;         // score: bare SQL candidate
  std::string trace_text;  // score: full trace candidate

  // serve
  std::string host = "127.0.0.1";
  int port = 8080;
  int max_batch = 256;
  int queue_depth = 8;

  std::string fixtures_dir;  // make-fixtures

  // Stable fingerprint of the resolved configuration, recorded in every
  // output's provenance header.
  std::string config_digest() const;
};

// Applies JSON config-file keys (same names as the long flags) onto cfg.
// Unknown keys are rejected so typos fail fast.
void apply_config_file(RunConfig& cfg, const std::string& path);

// Each command prints its primary result on `out`, diagnostics on `err`,
// and returns an ExitCode. They throw nothing: errors map to exit codes.
int run_validate_data(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int run_evaluate(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int run_score(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int run_select(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int run_collect(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int run_advantages(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int run_export_sft(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int run_pipeline(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int run_make_fixtures(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int run_serve(const RunConfig& cfg, std::ostream& out, std::ostream& err);

}  // namespace sqlverify
