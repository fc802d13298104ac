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

#include "sqlverify/dataset.hpp"

#include <sqlite3.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <set>
#include <sstream>

#include "json.hpp"
#include "sqlverify/errors.hpp"
#include "sqlverify/sqlexec.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace sqlverify {

namespace {

struct DbCloser {
  void operator()(sqlite3* db) const { sqlite3_close_v2(db); }
};
using DbHandle = std::unique_ptr<sqlite3, DbCloser>;

DbHandle open_read_only(const std::string& path) {
  if (!fs::exists(path)) throw IoError("database file not found: " + path);
  sqlite3* raw = nullptr;
  int rc = sqlite3_open_v2(path.c_str(), &raw, SQLITE_OPEN_READONLY, nullptr);
  DbHandle db(raw);
  if (rc != SQLITE_OK) {
    throw IoError("cannot open database " + path + ": " +
                  (raw ? sqlite3_errmsg(raw) : sqlite3_errstr(rc)));
  }
  return db;
}

// Header-level check that the file really is a database.
void check_is_database(sqlite3* db, const std::string& path) {
  sqlite3_stmt* stmt = nullptr;
  int rc = sqlite3_prepare_v2(db, "PRAGMA schema_version;", -1, &stmt, nullptr);
  if (rc == SQLITE_OK) rc = sqlite3_step(stmt);
  sqlite3_finalize(stmt);
  if (rc != SQLITE_ROW) {
    throw IoError("file is not a database: " + path);
  }
}

std::string quote_identifier(const std::string& name) {
  std::string out = "\"";
  for (char c : name) {
    out += c;
    if (c == '"') out += '"';
  }
  out += "\"";
  return out;
}

std::string read_text_column(sqlite3_stmt* stmt, int col) {
  const unsigned char* p = sqlite3_column_text(stmt, col);
  if (p == nullptr) return {};
  int n = sqlite3_column_bytes(stmt, col);
  return std::string(reinterpret_cast<const char*>(p), static_cast<std::size_t>(n));
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read file: " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

}  // namespace

const char* to_string(Difficulty d) {
  switch (d) {
    case Difficulty::kSimple:
      return "simple";
    case Difficulty::kModerate:
      return "moderate";
    case Difficulty::kChallenging:
      return "challenging";
  }
  return "unknown";
}

std::optional<Difficulty> difficulty_from_string(const std::string& s) {
  if (s == "simple") return Difficulty::kSimple;
  if (s == "moderate") return Difficulty::kModerate;
  if (s == "challenging") return Difficulty::kChallenging;
  return std::nullopt;
}

DatabaseCatalog DatabaseCatalog::discover(const std::string& root_path) {
  if (!fs::is_directory(root_path)) {
    throw IoError("database root is not a directory: " + root_path);
  }
  DatabaseCatalog catalog;
  catalog.root_path_ = root_path;
  for (const auto& entry : fs::directory_iterator(root_path)) {
    if (!entry.is_directory()) continue;
    const std::string db_id = entry.path().filename().string();
    fs::path db_file = entry.path() / (db_id + ".sqlite");
    if (fs::exists(db_file)) {
      catalog.entries_.emplace(db_id, db_file.string());
    }
  }
  return catalog;
}

void DatabaseCatalog::validate() const {
  std::vector<std::string> issues;
  for (const auto& [db_id, path] : entries_) {
    try {
      auto db = open_read_only(path);
      check_is_database(db.get(), path);
    } catch (const IoError& e) {
      issues.push_back("db " + db_id + ": " + e.what());
    }
  }
  if (!issues.empty()) throw ValidationError(std::move(issues));
}

const std::string& DatabaseCatalog::resolve(const std::string& db_id) const {
  auto it = entries_.find(db_id);
  if (it == entries_.end()) {
    throw UsageError("unknown db_id: " + db_id);
  }
  return it->second;
}

SchemaDescription describe_schema(const std::string& db_path,
                                  std::int64_t sample_rows_per_table) {
  if (sample_rows_per_table < 0) {
    throw UsageError("sample_rows_per_table must be non-negative");
  }
  auto db = open_read_only(db_path);
  check_is_database(db.get(), db_path);

  SchemaDescription schema;

  sqlite3_stmt* stmt = nullptr;
  int rc = sqlite3_prepare_v2(db.get(),
                              "SELECT name FROM sqlite_master WHERE type='table' "
                              "AND name NOT LIKE 'sqlite\\_%' ESCAPE '\\' "
                              "ORDER BY rowid;",
                              -1, &stmt, nullptr);
  if (rc != SQLITE_OK) throw IoError(std::string("schema read failed: ") + sqlite3_errmsg(db.get()));
  while (sqlite3_step(stmt) == SQLITE_ROW) {
    TableDescription table;
    table.name = read_text_column(stmt, 0);
    schema.tables.push_back(std::move(table));
  }
  sqlite3_finalize(stmt);

  for (auto& table : schema.tables) {
    const std::string quoted = quote_identifier(table.name);

    std::string sql = "PRAGMA table_info(" + quoted + ");";
    rc = sqlite3_prepare_v2(db.get(), sql.c_str(), -1, &stmt, nullptr);
    if (rc != SQLITE_OK) throw IoError(std::string("schema read failed: ") + sqlite3_errmsg(db.get()));
    while (sqlite3_step(stmt) == SQLITE_ROW) {
      ColumnDescription col;
      col.name = read_text_column(stmt, 1);
      col.declared_type = read_text_column(stmt, 2);
      col.is_primary_key = sqlite3_column_int(stmt, 5) > 0;
      table.columns.push_back(std::move(col));
    }
    sqlite3_finalize(stmt);

    sql = "PRAGMA foreign_key_list(" + quoted + ");";
    rc = sqlite3_prepare_v2(db.get(), sql.c_str(), -1, &stmt, nullptr);
    if (rc == SQLITE_OK) {
      while (sqlite3_step(stmt) == SQLITE_ROW) {
        ForeignKeyDescription fk;
        fk.to_table = read_text_column(stmt, 2);
        fk.from_column = read_text_column(stmt, 3);
        fk.to_column = read_text_column(stmt, 4);
        table.foreign_keys.push_back(std::move(fk));
      }
    }
    sqlite3_finalize(stmt);

    if (sample_rows_per_table > 0) {
      sql = "SELECT * FROM " + quoted + " LIMIT " +
            std::to_string(sample_rows_per_table) + ";";
      rc = sqlite3_prepare_v2(db.get(), sql.c_str(), -1, &stmt, nullptr);
      if (rc != SQLITE_OK) {
        throw IoError(std::string("schema read failed: ") + sqlite3_errmsg(db.get()));
      }
      const int n_cols = sqlite3_column_count(stmt);
      while (sqlite3_step(stmt) == SQLITE_ROW) {
        std::vector<std::string> row;
        row.reserve(static_cast<std::size_t>(n_cols));
        for (int c = 0; c < n_cols; ++c) {
          switch (sqlite3_column_type(stmt, c)) {
            case SQLITE_NULL:
              row.push_back(Value::null().to_display());
              break;
            case SQLITE_INTEGER:
              row.push_back(Value::integer(sqlite3_column_int64(stmt, c)).to_display());
              break;
            case SQLITE_FLOAT:
              row.push_back(Value::real(sqlite3_column_double(stmt, c)).to_display());
              break;
            case SQLITE_TEXT:
              row.push_back(Value::text(read_text_column(stmt, c)).to_display());
              break;
            default: {
              const void* p = sqlite3_column_blob(stmt, c);
              int n = sqlite3_column_bytes(stmt, c);
              Value::Blob b(static_cast<std::size_t>(n));
              if (n > 0) std::memcpy(b.data(), p, static_cast<std::size_t>(n));
              row.push_back(Value::blob(std::move(b)).to_display());
            }
          }
        }
        table.sample_rows.push_back(std::move(row));
      }
      sqlite3_finalize(stmt);
    }
  }
  return schema;
}

std::string SchemaDescription::to_json_string() const {
  json tables_json = json::array();
  for (const auto& table : tables) {
    json cols = json::array();
    for (const auto& col : table.columns) {
      cols.push_back({{"name", col.name},
                      {"type", col.declared_type},
                      {"pk", col.is_primary_key}});
    }
    json fks = json::array();
    for (const auto& fk : table.foreign_keys) {
      fks.push_back({{"from", fk.from_column},
                     {"to_table", fk.to_table},
                     {"to_column", fk.to_column}});
    }
    tables_json.push_back({{"name", table.name},
                           {"columns", cols},
                           {"foreign_keys", fks},
                           {"sample_rows", table.sample_rows}});
  }
  return json{{"tables", tables_json}}.dump();
}

std::string render_schema(const SchemaDescription& schema) {
  std::string out;
  bool first = true;
  for (const auto& table : schema.tables) {
    if (!first) out += "\n";
    first = false;

    out += "CREATE TABLE " + quote_identifier(table.name) + " (\n";
    for (std::size_t i = 0; i < table.columns.size(); ++i) {
      const auto& col = table.columns[i];
      out += "  " + quote_identifier(col.name);
      if (!col.declared_type.empty()) out += " " + col.declared_type;
      if (col.is_primary_key) out += " PRIMARY KEY";
      if (i + 1 < table.columns.size() || !table.foreign_keys.empty()) out += ",";
      out += "\n";
    }
    for (std::size_t i = 0; i < table.foreign_keys.size(); ++i) {
      const auto& fk = table.foreign_keys[i];
      out += "  FOREIGN KEY (" + quote_identifier(fk.from_column) + ") REFERENCES " +
             quote_identifier(fk.to_table);
      if (!fk.to_column.empty()) out += " (" + quote_identifier(fk.to_column) + ")";
      if (i + 1 < table.foreign_keys.size()) out += ",";
      out += "\n";
    }
    out += ");\n";

    if (!table.sample_rows.empty()) {
      out += "-- first " + std::to_string(table.sample_rows.size()) + " rows of " +
             quote_identifier(table.name) + ":\n";
      for (const auto& row : table.sample_rows) {
        out += "--   (";
        for (std::size_t c = 0; c < row.size(); ++c) {
          if (c > 0) out += ", ";
          out += row[c];
        }
        out += ")\n";
      }
    }
  }
  return out;
}

std::string unify_query(const std::string& question, const std::string& evidence) {
  if (question.empty()) throw UsageError("question must be non-empty");
  if (evidence.empty()) return question;
  return question + "\nHint: " + evidence;
}

PromptTemplate PromptTemplate::standard() {
  PromptTemplate tpl;
  tpl.template_text =
      "You are given a database schema and a question. Write one SQLite query "
      "that answers the question.\n"
      "\n"
      "Database schema:\n"
      "{schema}\n"
      "\n"
      "Question:\n"
      "{question}\n";
  tpl.instruction_block =
      "Think through the problem step by step: identify the relevant tables and "
      "columns, decide on any joins and filters, then write the query. End your "
      "answer with exactly one SQL query inside a ```sql fenced code block.";
  return tpl;
}

std::string render_prompt(const Datapoint& dp, const SchemaDescription& schema,
                          const PromptTemplate& tpl) {
  const std::string unified = unify_query(dp.question, dp.evidence);
  const std::string schema_text = render_schema(schema);

  std::string out;
  out.reserve(tpl.template_text.size() + schema_text.size() + unified.size());
  const std::string& text = tpl.template_text;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t open = text.find('{', pos);
    if (open == std::string::npos) {
      out.append(text, pos, std::string::npos);
      break;
    }
    std::size_t close = text.find('}', open + 1);
    if (close == std::string::npos) {
      out.append(text, pos, std::string::npos);
      break;
    }
    out.append(text, pos, open - pos);
    const std::string name = text.substr(open + 1, close - open - 1);
    if (name == "schema") {
      out += schema_text;
    } else if (name == "question") {
      out += unified;
    } else {
      throw TemplateError("template references unknown placeholder {" + name + "}",
                          name);
    }
    pos = close + 1;
  }
  if (!tpl.instruction_block.empty()) {
    out += "\n" + tpl.instruction_block + "\n";
  }
  return out;
}

std::vector<Datapoint> parse_split(const std::string& json_text,
                                   const DatabaseCatalog& catalog) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(e.what(), e.byte);
  }
  if (!doc.is_array()) {
    throw ParseError("split file must be a JSON array", 0);
  }

  std::vector<Datapoint> dps;
  dps.reserve(doc.size());
  std::vector<std::string> issues;
  std::set<std::string> unresolved;

  for (std::size_t i = 0; i < doc.size(); ++i) {
    const json& item = doc[i];
    const std::string at = "datapoint " + std::to_string(i);
    if (!item.is_object()) {
      issues.push_back(at + ": not a JSON object");
      continue;
    }
    auto require_string = [&](const char* field) -> std::optional<std::string> {
      if (!item.contains(field) || !item[field].is_string()) {
        issues.push_back(at + ": missing required field \"" + field + "\"");
        return std::nullopt;
      }
      std::string v = item[field].get<std::string>();
      if (v.empty()) {
        issues.push_back(at + ": field \"" + field + "\" is empty");
        return std::nullopt;
      }
      return v;
    };

    Datapoint dp;
    auto question = require_string("question");
    auto db_id = require_string("db_id");
    auto gold = require_string("SQL");
    if (!question || !db_id || !gold) continue;
    dp.question = *question;
    dp.db_id = *db_id;
    dp.gold_sql = *gold;
    if (item.contains("question_id")) {
      if (!item["question_id"].is_number_integer()) {
        issues.push_back(at + ": field \"question_id\" must be an integer");
        continue;
      }
      dp.question_id = item["question_id"].get<std::int64_t>();
    } else {
      dp.question_id = static_cast<std::int64_t>(i);
    }
    dp.evidence =
        item.contains("evidence") && item["evidence"].is_string()
            ? item["evidence"].get<std::string>()
            : std::string{};
    if (item.contains("difficulty")) {
      if (!item["difficulty"].is_string()) {
        issues.push_back(at + ": field \"difficulty\" must be a string");
        continue;
      }
      auto d = difficulty_from_string(item["difficulty"].get<std::string>());
      if (!d) {
        issues.push_back(at + ": field \"difficulty\" must be one of "
                              "simple/moderate/challenging");
        continue;
      }
      dp.difficulty = d;
    }
    if (!catalog.contains(dp.db_id)) unresolved.insert(dp.db_id);
    dps.push_back(std::move(dp));
  }

  if (!unresolved.empty()) {
    std::string msg = "unresolved db_ids:";
    for (const auto& id : unresolved) msg += " " + id;
    issues.push_back(std::move(msg));
  }
  if (!issues.empty()) throw ValidationError(std::move(issues));
  return dps;
}

std::vector<Datapoint> load_split(const std::string& path,
                                  const DatabaseCatalog& catalog) {
  return parse_split(read_file(path), catalog);
}

std::string serialize_split(const std::vector<Datapoint>& dps) {
  json arr = json::array();
  for (const auto& dp : dps) {
    json item = {{"question_id", dp.question_id},
                 {"db_id", dp.db_id},
                 {"question", dp.question},
                 {"evidence", dp.evidence},
                 {"SQL", dp.gold_sql}};
    if (dp.difficulty) item["difficulty"] = to_string(*dp.difficulty);
    arr.push_back(std::move(item));
  }
  return arr.dump(2);
}

bool operator==(const Datapoint& a, const Datapoint& b) {
  return a.question_id == b.question_id && a.db_id == b.db_id &&
         a.question == b.question && a.evidence == b.evidence &&
         a.gold_sql == b.gold_sql && a.difficulty == b.difficulty;
}

}  // namespace sqlverify
