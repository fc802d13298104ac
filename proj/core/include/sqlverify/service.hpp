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
#include <memory>
#include <string>

#include "sqlverify/sqlexec.hpp"

namespace sqlverify {

struct ServiceConfig {
  std::string db_root;
  std::string host = "127.0.0.1";
  int port = 8080;           // 0 picks an ephemeral port
  int pool_size = 4;         // concurrent scoring slots
  int queue_depth = 8;       // admitted beyond the pool before replying 429
  int max_batch = 256;
  SandboxConfig sandbox;
};

// Stateless JSON-over-HTTP scoring service for distributed rollout workers.
//
//   POST /v1/score        one {db_id, gold_sql, trace|sql} -> reward record
//   POST /v1/score_batch  array of the above, order-preserving
//   POST /v1/select       {db_id, candidates, gold_sql?} -> selection result
//   GET  /healthz         200 {status:"ok", catalog_dbs:N} once ready
//
// Responses are field-for-field what the in-process reward and
// selfconsistency calls return. Requests beyond pool_size + queue_depth
// concurrent scorings get 429 instead of queueing without bound.
class ScoreService {
 public:
  explicit ScoreService(ServiceConfig cfg);
  ~ScoreService();
  ScoreService(const ScoreService&) = delete;
  ScoreService& operator=(const ScoreService&) = delete;

  // Binds and starts serving on a background thread. /healthz answers 503
  // until mark_ready(). Throws IoError when the port cannot be bound.
  void start();

  // Validates the catalog (opens every database) and flips /healthz to 200.
  // Separate from start() so boot-time behavior is observable and callers
  // control when the validation cost is paid.
  void mark_ready();

  void stop();

  int port() const;                 // resolved port (after start())
  std::size_t catalog_size() const; // databases discovered under db_root

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace sqlverify
