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

#include "sqlverify/value.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>

#include "sqlverify/errors.hpp"

namespace sqlverify {

namespace {

// 2^63 exactly; doubles in [-2^63, 2^63) convert to int64 without overflow.
constexpr double kInt64Bound = 9223372036854775808.0;

int kind_rank(const Value& v) {
  if (v.is_null()) return 0;
  if (v.is_integer()) return 1;
  if (v.is_real()) return 2;
  if (v.is_text()) return 3;
  return 4;
}

}  // namespace

Value Value::real(double d) {
  Value v;
  if (std::isnan(d)) {
    return v;  // null
  }
  if (std::trunc(d) == d && d >= -kInt64Bound && d < kInt64Bound) {
    v.v_ = static_cast<std::int64_t>(d);
  } else {
    v.v_ = d;
  }
  return v;
}

bool Value::operator<(const Value& other) const {
  int ra = kind_rank(*this);
  int rb = kind_rank(other);
  if (ra != rb) return ra < rb;
  return v_ < other.v_;
}

std::string Value::to_display() const {
  if (is_null()) return "NULL";
  if (is_integer()) return std::to_string(as_integer());
  if (is_real()) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), as_real());
    (void)ec;
    return std::string(buf, end);
  }
  if (is_text()) {
    std::string out = "'";
    for (char c : as_text()) {
      out += c;
      if (c == '\'') out += '\'';
    }
    out += "'";
    return out;
  }
  static const char* digits = "0123456789abcdef";
  std::string out = "X'";
  for (std::uint8_t b : as_blob()) {
    out += digits[b >> 4];
    out += digits[b & 0xf];
  }
  out += "'";
  return out;
}

bool CanonicalResultSet::operator<(const CanonicalResultSet& other) const {
  if (arity != other.arity) return arity < other.arity;
  return rows < other.rows;
}

CanonicalResultSet canonicalize(const std::vector<Tuple>& raw_rows) {
  CanonicalResultSet out;
  if (raw_rows.empty()) {
    return out;  // arity 0 by definition
  }
  out.arity = raw_rows.front().size();
  for (const auto& row : raw_rows) {
    if (row.size() != out.arity) {
      char buf[96];
      std::snprintf(buf, sizeof(buf), "mixed arity in result rows: %zu vs %zu",
                    row.size(), out.arity);
      throw InternalError(buf);
    }
  }
  out.rows = raw_rows;
  std::sort(out.rows.begin(), out.rows.end());
  out.rows.erase(std::unique(out.rows.begin(), out.rows.end()), out.rows.end());
  return out;
}

}  // namespace sqlverify
