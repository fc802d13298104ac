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

#include <optional>
#include <string>

namespace sqlverify {

enum class ExtractionStatus { kFound, kNotFound };

const char* to_string(ExtractionStatus status);

struct ExtractionOptions {
  // When true, fence-free output whose first keyword starts a SQL statement
  // is accepted as the candidate. Off by default: the declared contract is a
  // fenced block; this exists for stub backends that emit bare SQL.
  bool permissive = false;
};

// Pulls the candidate SQL out of a model trace.
//
// Rule: the contents of the last ```sql fenced block win; if no ```sql block
// exists, the last generic ``` block whose first keyword is a SQL statement
// starter (SELECT/WITH/INSERT/UPDATE/DELETE) is used. Models that revise
// their answer append a corrected block, so the final block is the intended
// one. Fence markers and surrounding whitespace are stripped; the body is
// otherwise untouched (a trailing semicolon stays). Whitespace-only blocks
// are ignored, so the result is never an empty string. Absence is a value,
// not an error.
std::optional<std::string> extract_sql(const std::string& trace_text,
                                       const ExtractionOptions& opts = {});

// A full model output (the reasoning trace) plus its extracted SQL.
struct GenerationTrace {
  std::string text;
  std::optional<std::string> extracted_sql;
  ExtractionStatus extraction_status = ExtractionStatus::kNotFound;

  static GenerationTrace from_text(std::string text,
                                   const ExtractionOptions& opts = {});

  // Wraps SQL that never went through a model (e.g. a bare-SQL scoring
  // request); extraction is considered found.
  static GenerationTrace from_sql(std::string sql);
};

}  // namespace sqlverify
