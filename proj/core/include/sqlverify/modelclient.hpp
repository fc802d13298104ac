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
#include <optional>
#include <string>
#include <vector>

#include "sqlverify/trace.hpp"

namespace sqlverify {

struct GenerationRequest {
  std::string prompt;
  int n = 1;
  double temperature = 0.0;
  int max_tokens = 4096;
  std::optional<std::int64_t> seed;

  void validate() const;  // throws UsageError on out-of-range fields
};

struct RemoteBackendConfig {
  std::string base_url;  // e.g. "http://127.0.0.1:8000/v1"
  std::string model_id;
  // Bearer token is read from this environment variable; it is never echoed
  // into logs or error messages.
  std::string auth_token_env_var = "SQLVERIFY_API_TOKEN";
  int request_timeout_ms = 120000;
  int max_retries = 3;
  int max_in_flight = 8;
  int backoff_base_ms = 500;
  double backoff_factor = 2.0;
  double backoff_jitter = 0.2;  // +/- fraction of the delay
  int backoff_cap_ms = 8000;
};

struct StubBackendConfig {
  // JSON file mapping a 16-hex-char prompt digest (see digest.hpp) or the
  // wildcard "*" to an array of trace strings.
  std::string script_path;
};

// Pluggable generation backend: an OpenAI-compatible chat-completions
// endpoint, or a deterministic scripted stub for hermetic runs.
class ModelBackend {
 public:
  enum class Kind { kRemote, kStub };

  static ModelBackend remote(RemoteBackendConfig cfg);
  // Loads and validates the script; throws IoError / ParseError /
  // ValidationError on a bad file.
  static ModelBackend stub(StubBackendConfig cfg);

  ModelBackend(ModelBackend&&) noexcept;
  ModelBackend& operator=(ModelBackend&&) noexcept;
  ~ModelBackend();

  Kind kind() const;
  const std::string& model_id() const;  // "stub" for stub backends

  // Cheap connectivity probe; throws BackendError when the remote endpoint
  // cannot be reached at all. No-op for stubs.
  void check_reachable() const;

  // Returns exactly req.n traces in completion order. The remote path
  // retries transient failures (connection errors, 429, 5xx) with capped
  // exponential backoff; auth rejections throw CredentialError without
  // retrying; exhausted retries throw BackendError carrying the last HTTP
  // status. The stub path is fully deterministic: entry trace i % size
  // serves completion i. A stub miss without a wildcard throws FixtureError
  // naming the digest.
  std::vector<GenerationTrace> generate(const GenerationRequest& req,
                                        const ExtractionOptions& opts = {}) const;

 private:
  ModelBackend();
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Parses "stub:<script>" or an http(s) URL into a backend. Anything else
// throws UsageError.
ModelBackend make_backend_from_spec(const std::string& spec,
                                    const std::string& model_id);

}  // namespace sqlverify
