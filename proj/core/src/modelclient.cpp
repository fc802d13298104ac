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

#include "sqlverify/modelclient.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstdlib>
#include <fstream>
#include <map>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "sqlverify/digest.hpp"
#include "sqlverify/errors.hpp"

using nlohmann::json;

namespace sqlverify {

namespace {

// Bounds the number of requests in flight against one backend.
class AdmissionLimiter {
 public:
  explicit AdmissionLimiter(int limit) : available_(limit < 1 ? 1 : limit) {}

  void acquire() {
    std::unique_lock<std::mutex> lock(mu_);
    cv_.wait(lock, [this] { return available_ > 0; });
    --available_;
  }
  void release() {
    {
      std::lock_guard<std::mutex> lock(mu_);
      ++available_;
    }
    cv_.notify_one();
  }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  int available_;
};

struct AdmissionGuard {
  explicit AdmissionGuard(AdmissionLimiter& limiter) : limiter_(limiter) {
    limiter_.acquire();
  }
  ~AdmissionGuard() { limiter_.release(); }
  AdmissionLimiter& limiter_;
};

struct ParsedUrl {
  std::string host_part;    // "http://host:port"
  std::string path_prefix;  // "" or "/v1"
};

ParsedUrl parse_base_url(const std::string& base_url) {
  auto scheme_end = base_url.find("://");
  if (scheme_end == std::string::npos) {
    throw UsageError("backend base_url must start with http:// or https://: " +
                     base_url);
  }
  auto path_start = base_url.find('/', scheme_end + 3);
  ParsedUrl out;
  if (path_start == std::string::npos) {
    out.host_part = base_url;
  } else {
    out.host_part = base_url.substr(0, path_start);
    out.path_prefix = base_url.substr(path_start);
    while (!out.path_prefix.empty() && out.path_prefix.back() == '/') {
      out.path_prefix.pop_back();
    }
  }
  return out;
}

}  // namespace

void GenerationRequest::validate() const {
  if (n < 1) throw UsageError("generation request n must be >= 1");
  if (max_tokens < 1) throw UsageError("generation request max_tokens must be >= 1");
  if (temperature < 0.0) throw UsageError("generation temperature must be >= 0");
}

struct ModelBackend::Impl {
  Kind kind = Kind::kStub;
  std::string model_id = "stub";

  // remote
  RemoteBackendConfig remote;
  ParsedUrl url;
  std::string auth_token;  // resolved once at construction
  mutable std::unique_ptr<AdmissionLimiter> limiter;

  // stub
  std::map<std::string, std::vector<std::string>> script;

  // Replaces any occurrence of the auth token so it can never leak through
  // an error message or log line.
  std::string scrub(std::string text) const {
    if (auth_token.empty()) return text;
    std::size_t pos = 0;
    while ((pos = text.find(auth_token, pos)) != std::string::npos) {
      text.replace(pos, auth_token.size(), "***");
      pos += 3;
    }
    return text;
  }

  std::chrono::milliseconds backoff_delay(int attempt) const {
    double delay = remote.backoff_base_ms *
                   std::pow(remote.backoff_factor, static_cast<double>(attempt));
    delay = std::min(delay, static_cast<double>(remote.backoff_cap_ms));
    static thread_local std::mt19937_64 rng{std::random_device{}()};
    std::uniform_real_distribution<double> jitter(1.0 - remote.backoff_jitter,
                                                  1.0 + remote.backoff_jitter);
    delay *= jitter(rng);
    if (delay < 0) delay = 0;
    return std::chrono::milliseconds(static_cast<std::int64_t>(delay));
  }

  std::vector<std::string> generate_remote(const GenerationRequest& req) const {
    json body;
    body["model"] = remote.model_id;
    body["messages"] = json::array({{{"role", "user"}, {"content", req.prompt}}});
    body["n"] = req.n;
    body["temperature"] = req.temperature;
    body["max_tokens"] = req.max_tokens;
    if (req.seed) body["seed"] = *req.seed;
    const std::string payload = body.dump();

    int last_status = 0;
    std::string last_error;
    for (int attempt = 0; attempt <= remote.max_retries; ++attempt) {
      if (attempt > 0) std::this_thread::sleep_for(backoff_delay(attempt - 1));

      AdmissionGuard guard(*limiter);
      httplib::Client client(url.host_part);
      client.set_connection_timeout(std::chrono::milliseconds(remote.request_timeout_ms));
      client.set_read_timeout(std::chrono::milliseconds(remote.request_timeout_ms));
      client.set_write_timeout(std::chrono::milliseconds(remote.request_timeout_ms));
      httplib::Headers headers;
      if (!auth_token.empty()) {
        headers.emplace("Authorization", "Bearer " + auth_token);
      }

      auto res = client.Post(url.path_prefix + "/chat/completions", headers,
                             payload, "application/json");
      if (!res) {
        last_status = 0;
        last_error = "connection error: " + httplib::to_string(res.error());
        continue;
      }
      if (res->status == 401 || res->status == 403) {
        throw CredentialError(
            scrub("backend rejected credentials (HTTP " +
                  std::to_string(res->status) + ")"),
            res->status);
      }
      if (res->status == 429 || res->status >= 500) {
        last_status = res->status;
        last_error = "HTTP " + std::to_string(res->status);
        continue;
      }
      if (res->status != 200) {
        throw BackendError(scrub("backend request failed: HTTP " +
                                 std::to_string(res->status)),
                           res->status);
      }

      json doc;
      try {
        doc = json::parse(res->body);
      } catch (const json::parse_error& e) {
        throw BackendError(scrub(std::string("backend returned invalid JSON: ") +
                                 e.what()),
                           res->status);
      }
      if (!doc.contains("choices") || !doc["choices"].is_array() ||
          doc["choices"].size() != static_cast<std::size_t>(req.n)) {
        const std::size_t got =
            doc.contains("choices") && doc["choices"].is_array()
                ? doc["choices"].size()
                : 0;
        throw BackendError(scrub("backend returned " + std::to_string(got) +
                                 " choices, expected " + std::to_string(req.n)),
                           res->status);
      }
      std::vector<std::pair<std::int64_t, std::string>> indexed;
      indexed.reserve(doc["choices"].size());
      std::int64_t fallback_index = 0;
      for (const auto& choice : doc["choices"]) {
        std::int64_t index = choice.value("index", fallback_index);
        ++fallback_index;
        if (!choice.contains("message") || !choice["message"].contains("content") ||
            !choice["message"]["content"].is_string()) {
          throw BackendError(scrub("backend choice is missing message.content"),
                             res->status);
        }
        indexed.emplace_back(index, choice["message"]["content"].get<std::string>());
      }
      std::stable_sort(indexed.begin(), indexed.end(),
                       [](const auto& a, const auto& b) { return a.first < b.first; });
      std::vector<std::string> texts;
      texts.reserve(indexed.size());
      for (auto& [_, text] : indexed) texts.push_back(std::move(text));
      return texts;
    }
    throw BackendError(scrub("backend retries exhausted (" +
                             std::to_string(remote.max_retries + 1) +
                             " attempts), last error: " + last_error),
                       last_status);
  }

  std::vector<std::string> generate_stub(const GenerationRequest& req) const {
    const std::string digest = fnv1a64_hex(req.prompt);
    auto it = script.find(digest);
    if (it == script.end()) it = script.find("*");
    if (it == script.end()) {
      throw FixtureError("stub script has no entry for prompt digest " + digest +
                             " and no wildcard",
                         digest);
    }
    const auto& entries = it->second;
    std::vector<std::string> texts;
    texts.reserve(static_cast<std::size_t>(req.n));
    for (int i = 0; i < req.n; ++i) {
      texts.push_back(entries[static_cast<std::size_t>(i) % entries.size()]);
    }
    return texts;
  }
};

ModelBackend::ModelBackend() : impl_(new Impl) {}
ModelBackend::ModelBackend(ModelBackend&&) noexcept = default;
ModelBackend& ModelBackend::operator=(ModelBackend&&) noexcept = default;
ModelBackend::~ModelBackend() = default;

ModelBackend ModelBackend::remote(RemoteBackendConfig cfg) {
  if (cfg.max_in_flight < 1) throw UsageError("max_in_flight must be >= 1");
  ModelBackend backend;
  backend.impl_->kind = Kind::kRemote;
  backend.impl_->model_id = cfg.model_id;
  backend.impl_->url = parse_base_url(cfg.base_url);
  backend.impl_->limiter = std::make_unique<AdmissionLimiter>(cfg.max_in_flight);
  if (!cfg.auth_token_env_var.empty()) {
    if (const char* token = std::getenv(cfg.auth_token_env_var.c_str())) {
      backend.impl_->auth_token = token;
    }
  }
  backend.impl_->remote = std::move(cfg);
  return backend;
}

ModelBackend ModelBackend::stub(StubBackendConfig cfg) {
  std::ifstream in(cfg.script_path, std::ios::binary);
  if (!in) throw IoError("cannot read stub script: " + cfg.script_path);
  std::ostringstream buf;
  buf << in.rdbuf();

  json doc;
  try {
    doc = json::parse(buf.str());
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("stub script: ") + e.what(), e.byte);
  }
  if (!doc.is_object()) {
    throw ValidationError({"stub script must be a JSON object"});
  }

  ModelBackend backend;
  backend.impl_->kind = Kind::kStub;
  std::vector<std::string> issues;
  for (const auto& [key, value] : doc.items()) {
    if (!value.is_array() || value.empty()) {
      issues.push_back("stub entry \"" + key + "\" must be a non-empty array");
      continue;
    }
    std::vector<std::string> traces;
    for (const auto& item : value) {
      if (!item.is_string()) {
        issues.push_back("stub entry \"" + key + "\" must contain only strings");
        break;
      }
      traces.push_back(item.get<std::string>());
    }
    if (traces.size() == value.size()) {
      backend.impl_->script.emplace(key, std::move(traces));
    }
  }
  if (!issues.empty()) throw ValidationError(std::move(issues));
  return backend;
}

ModelBackend::Kind ModelBackend::kind() const { return impl_->kind; }
const std::string& ModelBackend::model_id() const { return impl_->model_id; }

void ModelBackend::check_reachable() const {
  if (impl_->kind == Kind::kStub) return;
  httplib::Client client(impl_->url.host_part);
  client.set_connection_timeout(std::chrono::seconds(5));
  client.set_read_timeout(std::chrono::seconds(5));
  auto res = client.Get(impl_->url.path_prefix.empty() ? "/" : impl_->url.path_prefix);
  // Any HTTP response proves the endpoint is reachable.
  if (!res) {
    throw BackendError(impl_->scrub("backend unreachable at " + impl_->url.host_part +
                                    ": " + httplib::to_string(res.error())));
  }
}

std::vector<GenerationTrace> ModelBackend::generate(
    const GenerationRequest& req, const ExtractionOptions& opts) const {
  req.validate();
  std::vector<std::string> texts = impl_->kind == Kind::kStub
                                       ? impl_->generate_stub(req)
                                       : impl_->generate_remote(req);
  std::vector<GenerationTrace> traces;
  traces.reserve(texts.size());
  for (auto& text : texts) {
    traces.push_back(GenerationTrace::from_text(std::move(text), opts));
  }
  return traces;
}

ModelBackend make_backend_from_spec(const std::string& spec,
                                    const std::string& model_id) {
  if (spec.rfind("stub:", 0) == 0) {
    return ModelBackend::stub({spec.substr(5)});
  }
  if (spec.rfind("http://", 0) == 0 || spec.rfind("https://", 0) == 0) {
    RemoteBackendConfig cfg;
    cfg.base_url = spec;
    cfg.model_id = model_id;
    return ModelBackend::remote(std::move(cfg));
  }
  throw UsageError("backend spec must be stub:<script.json> or an http(s) URL: " +
                   spec);
}

}  // namespace sqlverify
