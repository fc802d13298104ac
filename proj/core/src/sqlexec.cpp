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

#include "sqlverify/sqlexec.hpp"

#include <sqlite3.h>

#include <chrono>
#include <cstring>
#include <filesystem>
#include <memory>

#include "sqlverify/errors.hpp"

namespace sqlverify {

namespace {

using Clock = std::chrono::steady_clock;

struct DbCloser {
  void operator()(sqlite3* db) const { sqlite3_close_v2(db); }
};
struct StmtFinalizer {
  void operator()(sqlite3_stmt* stmt) const { sqlite3_finalize(stmt); }
};
using DbHandle = std::unique_ptr<sqlite3, DbCloser>;
using StmtHandle = std::unique_ptr<sqlite3_stmt, StmtFinalizer>;

struct Deadline {
  Clock::time_point at;
  bool hit = false;
};

extern "C" int progress_callback(void* ctx) {
  auto* deadline = static_cast<Deadline*>(ctx);
  if (Clock::now() >= deadline->at) {
    deadline->hit = true;
    return 1;  // interrupt the statement
  }
  return 0;
}

Value column_value(sqlite3_stmt* stmt, int col) {
  switch (sqlite3_column_type(stmt, col)) {
    case SQLITE_NULL:
      return Value::null();
    case SQLITE_INTEGER:
      return Value::integer(sqlite3_column_int64(stmt, col));
    case SQLITE_FLOAT:
      return Value::real(sqlite3_column_double(stmt, col));
    case SQLITE_TEXT: {
      const unsigned char* p = sqlite3_column_text(stmt, col);
      int n = sqlite3_column_bytes(stmt, col);
      return Value::text(std::string(reinterpret_cast<const char*>(p),
                                     static_cast<std::size_t>(n)));
    }
    default: {  // SQLITE_BLOB
      const void* p = sqlite3_column_blob(stmt, col);
      int n = sqlite3_column_bytes(stmt, col);
      Value::Blob b(static_cast<std::size_t>(n));
      if (n > 0) std::memcpy(b.data(), p, static_cast<std::size_t>(n));
      return Value::blob(std::move(b));
    }
  }
}

bool only_whitespace_or_comments(sqlite3* db, const char* tail) {
  if (tail == nullptr || *tail == '\0') return true;
  sqlite3_stmt* stmt = nullptr;
  int rc = sqlite3_prepare_v2(db, tail, -1, &stmt, nullptr);
  bool empty = (rc == SQLITE_OK && stmt == nullptr);
  sqlite3_finalize(stmt);
  return empty;
}

}  // namespace

void SandboxConfig::validate() const {
  if (timeout_ms <= 0) throw UsageError("sandbox timeout_ms must be positive");
  if (max_rows <= 0) throw UsageError("sandbox max_rows must be positive");
  if (!read_only) throw UsageError("sandbox read_only=false is not supported");
}

const char* to_string(ExecStatus status) {
  switch (status) {
    case ExecStatus::kSuccess:
      return "success";
    case ExecStatus::kSyntaxError:
      return "syntax_error";
    case ExecStatus::kRuntimeError:
      return "runtime_error";
    case ExecStatus::kTimeout:
      return "timeout";
    case ExecStatus::kRowCapExceeded:
      return "row_cap_exceeded";
  }
  return "unknown";
}

ExecutionOutcome execute(const std::string& db_path, const std::string& sql,
                         const SandboxConfig& cfg) {
  cfg.validate();
  if (!std::filesystem::exists(db_path)) {
    throw IoError("database file not found: " + db_path);
  }

  const auto start = Clock::now();
  auto finish = [&start](ExecutionOutcome out) {
    out.elapsed_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                         Clock::now() - start)
                         .count();
    return out;
  };

  sqlite3* raw = nullptr;
  int rc = sqlite3_open_v2(db_path.c_str(), &raw, SQLITE_OPEN_READONLY, nullptr);
  DbHandle db(raw);
  if (rc != SQLITE_OK) {
    throw IoError("cannot open database " + db_path + ": " +
                  (raw ? sqlite3_errmsg(raw) : sqlite3_errstr(rc)));
  }
  // Second layer on top of the read-only open flag.
  sqlite3_exec(db.get(), "PRAGMA query_only = 1;", nullptr, nullptr, nullptr);

  Deadline deadline{start + std::chrono::milliseconds(cfg.timeout_ms)};
  sqlite3_progress_handler(db.get(), 500, progress_callback, &deadline);

  sqlite3_stmt* raw_stmt = nullptr;
  const char* tail = nullptr;
  rc = sqlite3_prepare_v2(db.get(), sql.c_str(), -1, &raw_stmt, &tail);
  StmtHandle stmt(raw_stmt);
  if (rc != SQLITE_OK) {
    if (rc == SQLITE_NOTADB) {
      throw IoError("file is not a database: " + db_path);
    }
    ExecutionOutcome out;
    out.status = ExecStatus::kSyntaxError;
    out.detail = sqlite3_errmsg(db.get());
    return finish(out);
  }
  if (!stmt) {
    // Whitespace or comments only; nothing compiled.
    ExecutionOutcome out;
    out.status = ExecStatus::kSyntaxError;
    out.detail = "input contains no SQL statement";
    return finish(out);
  }
  if (!only_whitespace_or_comments(db.get(), tail)) {
    ExecutionOutcome out;
    out.status = ExecStatus::kSyntaxError;
    out.detail = "multiple statements are not allowed";
    return finish(out);
  }

  const int n_cols = sqlite3_column_count(stmt.get());
  std::vector<Tuple> raw_rows;
  std::int64_t row_count = 0;

  for (;;) {
    rc = sqlite3_step(stmt.get());
    if (rc == SQLITE_ROW) {
      ++row_count;
      if (row_count > cfg.max_rows) {
        ExecutionOutcome out;
        out.status = ExecStatus::kRowCapExceeded;
        out.row_count = row_count;
        out.detail = "result exceeded max_rows=" + std::to_string(cfg.max_rows);
        return finish(out);
      }
      Tuple row;
      row.reserve(static_cast<std::size_t>(n_cols));
      for (int c = 0; c < n_cols; ++c) row.push_back(column_value(stmt.get(), c));
      raw_rows.push_back(std::move(row));
      continue;
    }
    if (rc == SQLITE_DONE) break;
    ExecutionOutcome out;
    if (rc == SQLITE_INTERRUPT && deadline.hit) {
      out.status = ExecStatus::kTimeout;
      out.detail = "exceeded timeout_ms=" + std::to_string(cfg.timeout_ms);
    } else {
      out.status = ExecStatus::kRuntimeError;
      out.detail = sqlite3_errmsg(db.get());
    }
    out.row_count = row_count;
    return finish(out);
  }

  ExecutionOutcome out;
  out.status = ExecStatus::kSuccess;
  out.rows = canonicalize(raw_rows);
  out.row_count = row_count;
  return finish(out);
}

}  // namespace sqlverify
