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
#include <optional>
#include <string>

#include "sqlverify/value.hpp"

namespace sqlverify {

struct SandboxConfig {
  std::int64_t timeout_ms = 30000;
  std::int64_t max_rows = 100000;
  bool read_only = true;  // v1 accepts no other value

  void validate() const;  // throws UsageError on out-of-range fields
};

enum class ExecStatus {
  kSuccess,
  kSyntaxError,   // the statement failed to compile (parse or resolve)
  kRuntimeError,  // compiled but failed while running (incl. write attempts)
  kTimeout,
  kRowCapExceeded,
};

const char* to_string(ExecStatus status);

struct ExecutionOutcome {
  ExecStatus status = ExecStatus::kRuntimeError;
  std::optional<CanonicalResultSet> rows;  // present iff status == kSuccess
  std::int64_t row_count = 0;              // raw rows consumed, pre-dedup
  std::int64_t elapsed_ms = 0;
  std::string detail;  // engine message for non-success statuses

  bool ok() const { return status == ExecStatus::kSuccess; }
};

// Runs the first statement of `sql` against the database at `db_path` on a
// private read-only connection and canonicalizes the result.
//
// Classification: prepare failure -> kSyntaxError; failure during stepping
// -> kRuntimeError (a write attempt parses, then fails read-only
// enforcement, so it lands here); deadline exceeded -> kTimeout; more than
// cfg.max_rows result rows -> kRowCapExceeded. Any trailing second
// statement is rejected as kSyntaxError.
//
// Throws IoError when the file is missing or is not a database: that is a
// harness misconfiguration, not a property of the SQL under test.
ExecutionOutcome execute(const std::string& db_path, const std::string& sql,
                         const SandboxConfig& cfg);

}  // namespace sqlverify
