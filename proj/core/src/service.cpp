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

#include "sqlverify/service.hpp"

#include <atomic>
#include <future>
#include <mutex>
#include <thread>
#include <vector>

#include "httplib.h"
#include "json.hpp"
#include "sqlverify/dataset.hpp"
#include "sqlverify/errors.hpp"
#include "sqlverify/reward.hpp"
#include "sqlverify/selfconsistency.hpp"
#include "sqlverify/thread_pool.hpp"
#include "sqlverify/trace.hpp"

using nlohmann::json;

namespace sqlverify {

namespace {

struct ScoreOutcome {
  int http_status = 200;
  json body;
};

}  // namespace

struct ScoreService::Impl {
  ServiceConfig cfg;
  DatabaseCatalog catalog;
  httplib::Server server;
  std::thread serve_thread;
  std::atomic<bool> ready{false};
  std::atomic<bool> started{false};
  int bound_port = 0;

  // Admission control: at most pool_size + queue_depth requests hold a
  // scoring ticket; the rest are turned away with 429.
  std::atomic<int> admitted{0};
  std::unique_ptr<ThreadPool> pool;

  explicit Impl(ServiceConfig config)
      : cfg(std::move(config)), catalog(DatabaseCatalog::discover(cfg.db_root)) {
    pool = std::make_unique<ThreadPool>(static_cast<std::size_t>(
        cfg.pool_size < 1 ? 1 : cfg.pool_size));
    register_routes();
  }

  ~Impl() { shutdown(); }

  void shutdown() {
    if (started.exchange(false)) {
      server.stop();
      if (serve_thread.joinable()) serve_thread.join();
    }
  }

  class AdmissionTicket {
   public:
    AdmissionTicket(std::atomic<int>& admitted, int limit)
        : admitted_(admitted) {
      int current = admitted_.load();
      while (current < limit &&
             !admitted_.compare_exchange_weak(current, current + 1)) {
      }
      ok_ = current < limit;
    }
    ~AdmissionTicket() {
      if (ok_) admitted_.fetch_sub(1);
    }
    bool ok() const { return ok_; }

   private:
    std::atomic<int>& admitted_;
    bool ok_ = false;
  };

  // One scoring unit, shared by /v1/score and /v1/score_batch elements.
  // Per-element failures come back as {error: ...} payloads, not thrown.
  ScoreOutcome score_one(const json& req) {
    ScoreOutcome out;
    if (!req.is_object()) {
      out.http_status = 400;
      out.body = {{"error", "bad_request"}, {"detail", "request must be an object"}};
      return out;
    }
    if (!req.contains("db_id") || !req["db_id"].is_string()) {
      out.http_status = 400;
      out.body = {{"error", "bad_request"}, {"detail", "db_id is required"}};
      return out;
    }
    if (!req.contains("gold_sql") || !req["gold_sql"].is_string()) {
      out.http_status = 400;
      out.body = {{"error", "bad_request"}, {"detail", "gold_sql is required"}};
      return out;
    }
    const bool has_trace = req.contains("trace") && req["trace"].is_string();
    const bool has_sql = req.contains("sql") && req["sql"].is_string();
    if (has_trace == has_sql) {  // both or neither
      out.http_status = 400;
      out.body = {{"error", "bad_request"},
                  {"detail", "exactly one of trace/sql is required"}};
      return out;
    }

    const std::string db_id = req["db_id"].get<std::string>();
    if (!catalog.contains(db_id)) {
      out.http_status = 404;
      out.body = {{"error", "unknown_db"}, {"db_id", db_id}};
      return out;
    }

    Datapoint dp;
    dp.db_id = db_id;
    dp.question = "(service request)";
    dp.gold_sql = req["gold_sql"].get<std::string>();

    SandboxConfig sandbox = cfg.sandbox;
    if (req.contains("timeout_ms") && req["timeout_ms"].is_number_integer()) {
      sandbox.timeout_ms = req["timeout_ms"].get<std::int64_t>();
    }

    GenerationTrace trace =
        has_trace ? GenerationTrace::from_text(req["trace"].get<std::string>())
                  : GenerationTrace::from_sql(req["sql"].get<std::string>());

    try {
      RewardRecord rec = score(dp, trace, catalog.resolve(db_id), sandbox);
      out.body = json::parse(to_json_string(rec));
    } catch (const GoldExecutionError& e) {
      out.http_status = 422;
      out.body = {{"error", "gold_execution_failed"},
                  {"gold_status", to_string(e.gold_outcome().status)},
                  {"detail", e.gold_outcome().detail}};
    } catch (const UsageError& e) {
      out.http_status = 400;
      out.body = {{"error", "bad_request"}, {"detail", e.what()}};
    } catch (const Error& e) {
      out.http_status = 500;
      out.body = {{"error", "internal"}, {"detail", e.what()}};
    }
    return out;
  }

  void register_routes() {
    server.Get("/healthz", [this](const httplib::Request&, httplib::Response& res) {
      if (!ready.load()) {
        res.status = 503;
        res.set_content(json{{"status", "booting"}}.dump(), "application/json");
        return;
      }
      res.set_content(json{{"status", "ok"},
                           {"catalog_dbs", catalog.entries().size()}}
                          .dump(),
                      "application/json");
    });

    server.Post("/v1/score", [this](const httplib::Request& req,
                                    httplib::Response& res) {
      if (!ready.load()) {
        res.status = 503;
        res.set_content(json{{"error", "booting"}}.dump(), "application/json");
        return;
      }
      json body;
      try {
        body = json::parse(req.body);
      } catch (const json::parse_error& e) {
        res.status = 400;
        res.set_content(json{{"error", "bad_request"}, {"detail", e.what()}}.dump(),
                        "application/json");
        return;
      }
      AdmissionTicket ticket(admitted, cfg.pool_size + cfg.queue_depth);
      if (!ticket.ok()) {
        res.status = 429;
        res.set_content(json{{"error", "saturated"}}.dump(), "application/json");
        return;
      }
      ScoreOutcome out = pool->submit([this, &body] { return score_one(body); }).get();
      res.status = out.http_status;
      res.set_content(out.body.dump(), "application/json");
    });

    server.Post("/v1/score_batch", [this](const httplib::Request& req,
                                          httplib::Response& res) {
      if (!ready.load()) {
        res.status = 503;
        res.set_content(json{{"error", "booting"}}.dump(), "application/json");
        return;
      }
      json body;
      try {
        body = json::parse(req.body);
      } catch (const json::parse_error& e) {
        res.status = 400;
        res.set_content(json{{"error", "bad_request"}, {"detail", e.what()}}.dump(),
                        "application/json");
        return;
      }
      if (!body.is_array()) {
        res.status = 400;
        res.set_content(json{{"error", "bad_request"},
                             {"detail", "batch must be an array"}}
                            .dump(),
                        "application/json");
        return;
      }
      if (body.size() > static_cast<std::size_t>(cfg.max_batch)) {
        res.status = 413;
        res.set_content(json{{"error", "batch_too_large"},
                             {"max_batch", cfg.max_batch}}
                            .dump(),
                        "application/json");
        return;
      }
      AdmissionTicket ticket(admitted, cfg.pool_size + cfg.queue_depth);
      if (!ticket.ok()) {
        res.status = 429;
        res.set_content(json{{"error", "saturated"}}.dump(), "application/json");
        return;
      }
      std::vector<std::future<ScoreOutcome>> futures;
      futures.reserve(body.size());
      for (const auto& element : body) {
        futures.push_back(pool->submit([this, &element] { return score_one(element); }));
      }
      json results = json::array();
      for (auto& fut : futures) {
        ScoreOutcome out = fut.get();
        // Per-element errors ride inside the element, not the batch status.
        results.push_back(std::move(out.body));
      }
      res.set_content(results.dump(), "application/json");
    });

    server.Post("/v1/select", [this](const httplib::Request& req,
                                     httplib::Response& res) {
      if (!ready.load()) {
        res.status = 503;
        res.set_content(json{{"error", "booting"}}.dump(), "application/json");
        return;
      }
      json body;
      try {
        body = json::parse(req.body);
      } catch (const json::parse_error& e) {
        res.status = 400;
        res.set_content(json{{"error", "bad_request"}, {"detail", e.what()}}.dump(),
                        "application/json");
        return;
      }
      if (!body.is_object() || !body.contains("db_id") ||
          !body["db_id"].is_string() || !body.contains("candidates") ||
          !body["candidates"].is_array() || body["candidates"].empty()) {
        res.status = 400;
        res.set_content(json{{"error", "bad_request"},
                             {"detail", "db_id and non-empty candidates required"}}
                            .dump(),
                        "application/json");
        return;
      }
      const std::string db_id = body["db_id"].get<std::string>();
      if (!catalog.contains(db_id)) {
        res.status = 404;
        res.set_content(json{{"error", "unknown_db"}, {"db_id", db_id}}.dump(),
                        "application/json");
        return;
      }
      std::vector<GenerationTrace> candidates;
      candidates.reserve(body["candidates"].size());
      for (const auto& candidate : body["candidates"]) {
        if (!candidate.is_string()) {
          res.status = 400;
          res.set_content(json{{"error", "bad_request"},
                               {"detail", "candidates must be strings"}}
                              .dump(),
                          "application/json");
          return;
        }
        candidates.push_back(GenerationTrace::from_text(candidate.get<std::string>()));
      }

      AdmissionTicket ticket(admitted, cfg.pool_size + cfg.queue_depth);
      if (!ticket.ok()) {
        res.status = 429;
        res.set_content(json{{"error", "saturated"}}.dump(), "application/json");
        return;
      }
      try {
        SelectionResult selection =
            select(candidates, catalog.resolve(db_id), cfg.sandbox, *pool);
        json out = json::parse(to_json_string(selection));
        if (body.contains("gold_sql") && body["gold_sql"].is_string()) {
          Datapoint dp;
          dp.db_id = db_id;
          dp.question = "(service request)";
          dp.gold_sql = body["gold_sql"].get<std::string>();
          try {
            RewardRecord rec = score(dp, candidates[selection.chosen_index],
                                     catalog.resolve(db_id), cfg.sandbox);
            out["chosen_reward"] = rec.reward;
          } catch (const GoldExecutionError& e) {
            res.status = 422;
            res.set_content(json{{"error", "gold_execution_failed"},
                                 {"gold_status", to_string(e.gold_outcome().status)}}
                                .dump(),
                            "application/json");
            return;
          }
        }
        res.set_content(out.dump(), "application/json");
      } catch (const Error& e) {
        res.status = 500;
        res.set_content(json{{"error", "internal"}, {"detail", e.what()}}.dump(),
                        "application/json");
      }
    });
  }
};

ScoreService::ScoreService(ServiceConfig cfg) : impl_(new Impl(std::move(cfg))) {}
ScoreService::~ScoreService() = default;

void ScoreService::start() {
  Impl& impl = *impl_;
  if (impl.started.exchange(true)) return;

  if (impl.cfg.port == 0) {
    impl.bound_port = impl.server.bind_to_any_port(impl.cfg.host);
    if (impl.bound_port <= 0) {
      impl.started = false;
      throw IoError("cannot bind service port on " + impl.cfg.host);
    }
  } else {
    if (!impl.server.bind_to_port(impl.cfg.host, impl.cfg.port)) {
      impl.started = false;
      throw IoError("cannot bind service port " + std::to_string(impl.cfg.port) +
                    " on " + impl.cfg.host);
    }
    impl.bound_port = impl.cfg.port;
  }
  impl.serve_thread = std::thread([&impl] { impl.server.listen_after_bind(); });
  impl.server.wait_until_ready();
}

void ScoreService::mark_ready() {
  impl_->catalog.validate();
  impl_->ready = true;
}

void ScoreService::stop() { impl_->shutdown(); }

int ScoreService::port() const { return impl_->bound_port; }

std::size_t ScoreService::catalog_size() const {
  return impl_->catalog.entries().size();
}

}  // namespace sqlverify
