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

#include "sqlverify/trace.hpp"

#include <algorithm>
#include <cctype>
#include <string_view>
#include <vector>

namespace sqlverify {

namespace {

constexpr std::string_view kFence = "```";

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
    s.remove_prefix(1);
  }
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
    s.remove_suffix(1);
  }
  return s;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::string first_keyword(std::string_view body) {
  std::size_t i = 0;
  while (i < body.size() && std::isspace(static_cast<unsigned char>(body[i]))) ++i;
  std::size_t j = i;
  while (j < body.size() &&
         (std::isalpha(static_cast<unsigned char>(body[j])) || body[j] == '_')) {
    ++j;
  }
  return lower(body.substr(i, j - i));
}

bool is_statement_starter(std::string_view body) {
  const std::string kw = first_keyword(body);
  return kw == "select" || kw == "with" || kw == "insert" || kw == "update" ||
         kw == "delete";
}

struct FencedBlock {
  bool sql_tagged = false;
  std::string_view body;  // already trimmed, non-empty
};

// Pairs ``` markers in order of appearance. An unterminated final opener is
// not a block. ```sql<newline>body``` carries the tag on the opener line;
// a fence with no newline treats a leading "sql " token as the tag.
std::vector<FencedBlock> scan_blocks(std::string_view text) {
  std::vector<FencedBlock> blocks;
  std::size_t pos = 0;
  for (;;) {
    std::size_t open = text.find(kFence, pos);
    if (open == std::string_view::npos) break;
    std::size_t body_start = open + kFence.size();
    std::size_t close = text.find(kFence, body_start);
    if (close == std::string_view::npos) break;
    pos = close + kFence.size();

    std::string_view segment = text.substr(body_start, close - body_start);
    std::string tag;
    std::string_view body;
    std::size_t nl = segment.find('\n');
    if (nl != std::string_view::npos) {
      tag = lower(trim(segment.substr(0, nl)));
      body = segment.substr(nl + 1);
    } else {
      std::size_t sp = segment.find_first_of(" \t");
      if (sp != std::string_view::npos && lower(trim(segment.substr(0, sp))) == "sql") {
        tag = "sql";
        body = segment.substr(sp + 1);
      } else {
        body = segment;
      }
    }
    body = trim(body);
    if (body.empty()) continue;
    blocks.push_back({tag == "sql", body});
  }
  return blocks;
}

}  // namespace

const char* to_string(ExtractionStatus status) {
  return status == ExtractionStatus::kFound ? "found" : "not_found";
}

std::optional<std::string> extract_sql(const std::string& trace_text,
                                       const ExtractionOptions& opts) {
  const auto blocks = scan_blocks(trace_text);

  for (auto it = blocks.rbegin(); it != blocks.rend(); ++it) {
    if (it->sql_tagged) return std::string(it->body);
  }
  for (auto it = blocks.rbegin(); it != blocks.rend(); ++it) {
    if (is_statement_starter(it->body)) return std::string(it->body);
  }
  if (opts.permissive) {
    std::string_view whole = trim(trace_text);
    if (!whole.empty() && is_statement_starter(whole)) return std::string(whole);
  }
  return std::nullopt;
}

GenerationTrace GenerationTrace::from_text(std::string text,
                                           const ExtractionOptions& opts) {
  GenerationTrace trace;
  trace.text = std::move(text);
  trace.extracted_sql = extract_sql(trace.text, opts);
  trace.extraction_status = trace.extracted_sql.has_value()
                                ? ExtractionStatus::kFound
                                : ExtractionStatus::kNotFound;
  return trace;
}

GenerationTrace GenerationTrace::from_sql(std::string sql) {
  GenerationTrace trace;
  trace.text = sql;
  trace.extracted_sql = std::move(sql);
  trace.extraction_status = ExtractionStatus::kFound;
  return trace;
}

}  // namespace sqlverify
