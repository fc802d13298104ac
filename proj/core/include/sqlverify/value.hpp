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
#include <string>
#include <variant>
#include <vector>

namespace sqlverify {

// One normalized scalar from a result row.
//
// Normalization rules (applied on construction):
//   - an integral-valued real in int64 range becomes an integer, so 1.0 and 1
//     compare equal, mirroring the set-equality semantics of the reference
//     BIRD evaluator (Python's 1.0 == 1 under set hashing);
//   - NaN becomes null (SQLite itself never yields NaN; it stores NULL);
//   - booleans arrive from the engine as integers and stay integers.
//
// After normalization, equality is plain same-kind equality, which makes it
// a total equivalence relation.
class Value {
 public:
  using Blob = std::vector<std::uint8_t>;

  Value() : v_(std::monostate{}) {}  // null
  static Value null() { return Value(); }
  static Value integer(std::int64_t i) {
    Value v;
    v.v_ = i;
    return v;
  }
  static Value real(double d);  // applies numeric normalization
  static Value text(std::string s) {
    Value v;
    v.v_ = std::move(s);
    return v;
  }
  static Value blob(Blob b) {
    Value v;
    v.v_ = std::move(b);
    return v;
  }

  bool is_null() const { return std::holds_alternative<std::monostate>(v_); }
  bool is_integer() const { return std::holds_alternative<std::int64_t>(v_); }
  bool is_real() const { return std::holds_alternative<double>(v_); }
  bool is_text() const { return std::holds_alternative<std::string>(v_); }
  bool is_blob() const { return std::holds_alternative<Blob>(v_); }

  std::int64_t as_integer() const { return std::get<std::int64_t>(v_); }
  double as_real() const { return std::get<double>(v_); }
  const std::string& as_text() const { return std::get<std::string>(v_); }
  const Blob& as_blob() const { return std::get<Blob>(v_); }

  bool operator==(const Value& other) const { return v_ == other.v_; }
  bool operator!=(const Value& other) const { return !(*this == other); }
  bool operator<(const Value& other) const;

  // Display form for diagnostics and sample-row rendering. Not used for
  // equality.
  std::string to_display() const;

 private:
  std::variant<std::monostate, std::int64_t, double, std::string, Blob> v_;
};

using Tuple = std::vector<Value>;

// The normalized, deduplicated, order-insensitive form of a query result.
// Two results match iff their canonical sets are equal; tuple order is
// irrelevant, column order within a tuple is significant. An empty result
// has arity 0 regardless of how many columns the query projected, so empty
// results compare equal to each other and to nothing else.
struct CanonicalResultSet {
  std::vector<Tuple> rows;  // sorted, unique
  std::size_t arity = 0;

  bool operator==(const CanonicalResultSet& other) const {
    return arity == other.arity && rows == other.rows;
  }
  bool operator!=(const CanonicalResultSet& other) const { return !(*this == other); }
  bool operator<(const CanonicalResultSet& other) const;  // ordering for map keys
};

// Collapses raw rows to set form. Throws InternalError on mixed arity: the
// engine guarantees uniform arity, so a violation is a bug upstream.
CanonicalResultSet canonicalize(const std::vector<Tuple>& raw_rows);

}  // namespace sqlverify
