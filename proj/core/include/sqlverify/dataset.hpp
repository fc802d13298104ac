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
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace sqlverify {

enum class Difficulty { kSimple, kModerate, kChallenging };

const char* to_string(Difficulty d);
std::optional<Difficulty> difficulty_from_string(const std::string& s);

// One benchmark example: a natural-language question (plus optional
// evidence hint) over one database, with the reference SQL as ground truth.
struct Datapoint {
  std::int64_t question_id = 0;
  std::string db_id;
  std::string question;
  std::string evidence;  // may be empty
  std::string gold_sql;
  std::optional<Difficulty> difficulty;
};

// Maps db_id -> database file under the layout <root>/<db_id>/<db_id>.sqlite.
class DatabaseCatalog {
 public:
  // Scans the root directory for databases. Throws IoError when root does
  // not exist or is not a directory.
  static DatabaseCatalog discover(const std::string& root_path);

  // Opens every entry read-only and checks it parses as a database file.
  // Throws ValidationError listing every entry that fails.
  void validate() const;

  const std::string& root_path() const { return root_path_; }
  const std::map<std::string, std::string>& entries() const { return entries_; }
  bool contains(const std::string& db_id) const { return entries_.count(db_id) > 0; }

  // Throws UsageError when db_id is unknown.
  const std::string& resolve(const std::string& db_id) const;

 private:
  std::string root_path_;
  std::map<std::string, std::string> entries_;
};

struct ColumnDescription {
  std::string name;           // exactly as stored, case and quoting preserved
  std::string declared_type;  // may be empty (SQLite allows untyped columns)
  bool is_primary_key = false;
};

struct ForeignKeyDescription {
  std::string from_column;
  std::string to_table;
  std::string to_column;  // empty when the target's primary key is implied
};

struct TableDescription {
  std::string name;
  std::vector<ColumnDescription> columns;
  std::vector<ForeignKeyDescription> foreign_keys;
  std::vector<std::vector<std::string>> sample_rows;  // display-rendered values
};

// Structural snapshot of a database: every user table in storage order with
// columns, foreign keys, and up to R sample rows. Input to the prompt
// encoder; serialization is byte-stable for an unmodified file.
struct SchemaDescription {
  std::vector<TableDescription> tables;

  std::string to_json_string() const;
};

// Reads the schema of the database at db_path. System tables (the engine's
// reserved sqlite_* namespace) are excluded. Sample rows are the first
// `sample_rows_per_table` rows in stable storage order.
SchemaDescription describe_schema(const std::string& db_path,
                                  std::int64_t sample_rows_per_table);

// DDL-style rendering: one CREATE TABLE per table (names double-quoted as
// stored) followed by the sample rows as comment lines.
std::string render_schema(const SchemaDescription& schema);

// question + "\n" + "Hint: " + evidence when evidence is non-empty;
// the question alone otherwise.
std::string unify_query(const std::string& question, const std::string& evidence);

struct PromptTemplate {
  // Named placeholders {schema} and {question}.
  std::string template_text;
  // Appended after the template; asks for step-by-step reasoning and exactly
  // one final fenced SQL block, matching the extraction contract.
  std::string instruction_block;

  static PromptTemplate standard();
};

// Binds {schema} and {question}, then appends the instruction block.
// Deterministic for fixed inputs. Throws TemplateError naming the
// placeholder when the template references anything unbindable.
std::string render_prompt(const Datapoint& dp, const SchemaDescription& schema,
                          const PromptTemplate& tpl);

// Parses a BIRD-format split: a JSON array of objects with at least
// question, db_id, and SQL; evidence and difficulty optional, unknown keys
// ignored. question_id defaults to the array index when absent.
//
// Throws ParseError (with byte offset) on malformed JSON and
// ValidationError naming the datapoint index and field for every violation,
// including db_ids that do not resolve in the catalog.
std::vector<Datapoint> parse_split(const std::string& json_text,
                                   const DatabaseCatalog& catalog);

// parse_split over the contents of a file. Throws IoError when unreadable.
std::vector<Datapoint> load_split(const std::string& path,
                                  const DatabaseCatalog& catalog);

// BIRD-format JSON array; load_split(serialize_split(dps)) round-trips.
std::string serialize_split(const std::vector<Datapoint>& dps);

bool operator==(const Datapoint& a, const Datapoint& b);

}  // namespace sqlverify
