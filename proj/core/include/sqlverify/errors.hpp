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

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace sqlverify {

// Base class for every error thrown by this library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Missing, unreadable, or corrupt files. Signals harness misconfiguration,
// never a model failure.
class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(what) {}
};

// Malformed input text (e.g. a split file that is not valid JSON).
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t byte_offset)
      : Error(what), byte_offset_(byte_offset) {}
  std::size_t byte_offset() const { return byte_offset_; }

 private:
  std::size_t byte_offset_;
};

// Well-formed input that violates a documented invariant. Carries one
// message per offending item so callers can report them all at once.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<std::string> issues)
      : Error(join(issues)), issues_(std::move(issues)) {}
  const std::vector<std::string>& issues() const { return issues_; }

 private:
  static std::string join(const std::vector<std::string>& issues) {
    std::string out;
    for (const auto& issue : issues) {
      if (!out.empty()) out += "\n";
      out += issue;
    }
    return out;
  }
  std::vector<std::string> issues_;
};

// A prompt template referenced a placeholder that cannot be bound.
class TemplateError : public Error {
 public:
  TemplateError(const std::string& what, std::string placeholder)
      : Error(what), placeholder_(std::move(placeholder)) {}
  const std::string& placeholder() const { return placeholder_; }

 private:
  std::string placeholder_;
};

// API or CLI misuse (mismatched lengths, empty candidate lists, ...).
class UsageError : public Error {
 public:
  explicit UsageError(const std::string& what) : Error(what) {}
};

// A guaranteed-impossible state was observed; indicates a bug, not bad input.
class InternalError : public Error {
 public:
  explicit InternalError(const std::string& what) : Error(what) {}
};

// Remote generation backend failed (after retries, where applicable).
class BackendError : public Error {
 public:
  explicit BackendError(const std::string& what, int last_status = 0)
      : Error(what), last_status_(last_status) {}
  int last_status() const { return last_status_; }

 private:
  int last_status_;
};

// Authentication was rejected; retrying cannot help.
class CredentialError : public BackendError {
 public:
  explicit CredentialError(const std::string& what, int status)
      : BackendError(what, status) {}
};

// A scripted stub backend had no entry for a prompt.
class FixtureError : public Error {
 public:
  FixtureError(const std::string& what, std::string digest)
      : Error(what), digest_(std::move(digest)) {}
  const std::string& digest() const { return digest_; }

 private:
  std::string digest_;
};

}  // namespace sqlverify
