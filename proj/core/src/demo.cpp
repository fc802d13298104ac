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

#include "sqlverify/demo.hpp"

#include <sqlite3.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "json.hpp"
#include "sqlverify/dataset.hpp"
#include "sqlverify/digest.hpp"
#include "sqlverify/errors.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace sqlverify {

namespace {

class DbWriter {
 public:
  explicit DbWriter(const std::string& path) {
    if (sqlite3_open_v2(path.c_str(), &db_,
                        SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE,
                        nullptr) != SQLITE_OK) {
      throw IoError("cannot create database " + path);
    }
  }
  ~DbWriter() { sqlite3_close_v2(db_); }

  void exec(const std::string& sql) {
    char* err = nullptr;
    if (sqlite3_exec(db_, sql.c_str(), nullptr, nullptr, &err) != SQLITE_OK) {
      std::string message = err ? err : "unknown error";
      sqlite3_free(err);
      throw InternalError("demo fixture SQL failed: " + message + " in: " + sql);
    }
  }

 private:
  sqlite3* db_ = nullptr;
};

std::string db_path_for(const fs::path& root, const std::string& db_id) {
  fs::path dir = root / db_id;
  fs::create_directories(dir);
  return (dir / (db_id + ".sqlite")).string();
}

void build_california_schools(const std::string& path) {
  DbWriter db(path);
  db.exec(R"sql(
    CREATE TABLE frpm (
      "CDSCode" TEXT PRIMARY KEY,
      "School Name" TEXT,
      "County Name" TEXT,
      "Free Meal Count (K-12)" REAL,
      "Enrollment (K-12)" REAL
    );
  )sql");
  db.exec(R"sql(
    INSERT INTO frpm VALUES
      ('01100170109835', 'Bay Elementary',    'Alameda', 300.0, 500.0),
      ('01100170112607', 'Harbor High',       'Alameda', 150.0, 200.0),
      ('01100170118489', 'Creekside Middle',  'Alameda', 100.0, 400.0),
      ('10621660106401', 'Sierra Elementary', 'Fresno',  500.0, 600.0),
      ('10621661030642', 'Valley High',       'Fresno',   10.0, 100.0);
  )sql");
}

void build_superhero(const std::string& path) {
  DbWriter db(path);
  db.exec(R"sql(
    CREATE TABLE race (
      id INTEGER PRIMARY KEY,
      race TEXT
    );
  )sql");
  db.exec(R"sql(
    CREATE TABLE gender (
      id INTEGER PRIMARY KEY,
      gender TEXT
    );
  )sql");
  db.exec(R"sql(
    CREATE TABLE superhero (
      id INTEGER PRIMARY KEY,
      superhero_name TEXT,
      race_id INTEGER,
      gender_id INTEGER,
      FOREIGN KEY (race_id) REFERENCES race (id),
      FOREIGN KEY (gender_id) REFERENCES gender (id)
    );
  )sql");
  db.exec("INSERT INTO race VALUES (1, 'Human'), (2, 'Alien'), (21, 'God/Eternal');");
  db.exec("INSERT INTO gender VALUES (1, 'Male'), (2, 'Female');");
  db.exec(R"sql(
    INSERT INTO superhero VALUES
      (1, 'Thor',      21, 1),
      (2, 'Ares',      21, 1),
      (3, 'Hera',      21, 2),
      (4, 'Spiderman',  1, 1),
      (5, 'Starfire',   2, 2),
      (6, 'Odin',      21, 1);
  )sql");
}

void build_card_games(const std::string& path) {
  DbWriter db(path);
  db.exec(R"sql(
    CREATE TABLE cards (
      id INTEGER PRIMARY KEY,
      uuid TEXT UNIQUE,
      name TEXT,
      type TEXT
    );
  )sql");
  db.exec(R"sql(
    CREATE TABLE foreign_data (
      id INTEGER PRIMARY KEY,
      uuid TEXT,
      language TEXT,
      type TEXT,
      FOREIGN KEY (uuid) REFERENCES cards (uuid)
    );
  )sql");
  db.exec(R"sql(
    INSERT INTO cards VALUES
      (1, 'u-anc', 'Ancestor''s Chosen', 'Creature - Human Cleric'),
      (2, 'u-ang', 'Angel of Mercy',     'Creature - Angel');
  )sql");
  // two printings of the same card produce duplicate German rows
  db.exec(R"sql(
    INSERT INTO foreign_data VALUES
      (1, 'u-anc', 'German', 'Kreatur - Mensch, Kleriker'),
      (2, 'u-anc', 'German', 'Kreatur - Mensch, Kleriker'),
      (3, 'u-anc', 'French', 'Creature : ecclesiastre humain'),
      (4, 'u-ang', 'German', 'Kreatur - Engel');
  )sql");
}

void build_movie_platform(const std::string& path) {
  DbWriter db(path);
  db.exec(R"sql(
    CREATE TABLE movies (
      movie_id INTEGER PRIMARY KEY,
      title TEXT
    );
  )sql");
  db.exec(R"sql(
    CREATE TABLE ratings (
      rating_id INTEGER PRIMARY KEY,
      movie_id INTEGER,
      score INTEGER,
      FOREIGN KEY (movie_id) REFERENCES movies (movie_id)
    );
  )sql");
  db.exec(R"sql(
    INSERT INTO movies VALUES
      (1, 'Inception'),
      (2, 'Interstellar'),
      (3, 'Dune'),
      (4, 'Arrival');
  )sql");
  db.exec(R"sql(
    INSERT INTO ratings VALUES
      (1, 1, 4),
      (2, 1, 5),
      (3, 1, 3),
      (4, 2, 5),
      (5, 2, 4),
      (6, 3, 2);
  )sql");
}

void build_retail_orders(const std::string& path) {
  DbWriter db(path);
  db.exec(R"sql(
    CREATE TABLE orders (
      order_id INTEGER PRIMARY KEY,
      customer TEXT,
      region TEXT,
      amount REAL,
      discount REAL
    );
  )sql");
  db.exec(R"sql(
    INSERT INTO orders VALUES
      (1, 'Acme',     'west',  120.5, 0.1),
      (2, 'Acme',     'east',   80.0, NULL),
      (3, 'Globex',   'west',  200.0, 0.25),
      (4, 'Initech',  'north',  50.0, NULL),
      (5, 'Globex',   'east',  310.0, 0.0),
      (6, 'Umbrella', 'west',   40.0, 0.05);
  )sql");
}

json dp(std::int64_t question_id, const std::string& db_id,
        const std::string& question, const std::string& evidence,
        const std::string& sql, const char* difficulty) {
  json j;
  j["question_id"] = question_id;
  j["db_id"] = db_id;
  j["question"] = question;
  j["evidence"] = evidence;
  j["SQL"] = sql;
  j["difficulty"] = difficulty;
  return j;
}

json demo_split() {
  json arr = json::array();

  // california_schools
  arr.push_back(dp(
      1, "california_schools",
      "What is the highest eligible free rate for K-12 students in the schools "
      "in Alameda County?",
      "Eligible free rate for K-12 = `Free Meal Count (K-12)` / `Enrollment "
      "(K-12)`",
      "SELECT MAX(\"Free Meal Count (K-12)\" / \"Enrollment (K-12)\") FROM frpm "
      "WHERE \"County Name\" = 'Alameda'",
      "simple"));
  arr.push_back(dp(2, "california_schools",
                   "How many schools are in Fresno County?", "",
                   "SELECT COUNT(*) FROM frpm WHERE \"County Name\" = 'Fresno'",
                   "simple"));
  arr.push_back(dp(3, "california_schools",
                   "List the CDS codes of all schools in Alameda County.", "",
                   "SELECT \"CDSCode\" FROM frpm WHERE \"County Name\" = 'Alameda'",
                   "simple"));
  arr.push_back(dp(4, "california_schools",
                   "What is the total K-12 enrollment across all schools?", "",
                   "SELECT SUM(\"Enrollment (K-12)\") FROM frpm", "simple"));
  arr.push_back(dp(5, "california_schools",
                   "Which school has the lowest free meal count for K-12?",
                   "lowest free meal count refers to MIN(`Free Meal Count (K-12)`)",
                   "SELECT \"School Name\" FROM frpm ORDER BY \"Free Meal Count "
                   "(K-12)\" ASC LIMIT 1",
                   "moderate"));

  // superhero
  arr.push_back(dp(6, "superhero",
                   "Among the superheroes with the race of god/eternal, how many "
                   "of them are male?",
                   "race \"god/eternal\" refers to race_id = 21; male refers to "
                   "gender.id = 1",
                   "SELECT COUNT(*) FROM superhero WHERE race_id = 21 AND "
                   "gender_id = 1",
                   "simple"));
  arr.push_back(dp(7, "superhero", "How many superheroes are female?",
                   "female refers to gender.id = 2",
                   "SELECT COUNT(*) FROM superhero WHERE gender_id = 2", "simple"));
  arr.push_back(dp(8, "superhero", "List the names of all human superheroes.",
                   "human refers to race = 'Human'",
                   "SELECT T1.superhero_name FROM superhero AS T1 INNER JOIN race "
                   "AS T2 ON T1.race_id = T2.id WHERE T2.race = 'Human'",
                   "moderate"));
  arr.push_back(dp(9, "superhero", "What is the race of Starfire?", "",
                   "SELECT T2.race FROM superhero AS T1 INNER JOIN race AS T2 ON "
                   "T1.race_id = T2.id WHERE T1.superhero_name = 'Starfire'",
                   "moderate"));
  arr.push_back(dp(10, "superhero",
                   "How many superheroes are there of each gender?", "",
                   "SELECT T2.gender, COUNT(*) FROM superhero AS T1 INNER JOIN "
                   "gender AS T2 ON T1.gender_id = T2.id GROUP BY T2.gender",
                   "challenging"));

  // card_games
  arr.push_back(dp(11, "card_games",
                   "What's the German type of the card \"Ancestor's Chosen\"?",
                   "German refers to language = 'German'; \"Ancestor's Chosen\" "
                   "refers to name = 'Ancestor''s Chosen'",
                   "SELECT DISTINCT T1.type FROM cards AS T1 INNER JOIN "
                   "foreign_data AS T2 ON T2.uuid = T1.uuid WHERE T1.name = "
                   "'Ancestor''s Chosen' AND T2.language = 'German'",
                   "moderate"));
  arr.push_back(dp(12, "card_games",
                   "How many German translations exist for the card \"Ancestor's "
                   "Chosen\"?",
                   "German refers to language = 'German'",
                   "SELECT COUNT(*) FROM cards AS T1 INNER JOIN foreign_data AS "
                   "T2 ON T2.uuid = T1.uuid WHERE T1.name = 'Ancestor''s Chosen' "
                   "AND T2.language = 'German'",
                   "simple"));
  arr.push_back(dp(13, "card_games",
                   "List the distinct languages the card \"Ancestor's Chosen\" "
                   "has been translated into.",
                   "",
                   "SELECT DISTINCT T2.language FROM cards AS T1 INNER JOIN "
                   "foreign_data AS T2 ON T2.uuid = T1.uuid WHERE T1.name = "
                   "'Ancestor''s Chosen'",
                   "simple"));
  arr.push_back(dp(14, "card_games", "How many cards are in the collection?", "",
                   "SELECT COUNT(*) FROM cards", "simple"));
  arr.push_back(dp(15, "card_games",
                   "What is the English type of the card 'Angel of Mercy'?", "",
                   "SELECT type FROM cards WHERE name = 'Angel of Mercy'",
                   "simple"));

  // movie_platform
  arr.push_back(dp(16, "movie_platform", "Name the movie with the most ratings.",
                   "most ratings refers to MAX(COUNT(rating_id))",
                   "SELECT T1.title FROM movies AS T1 INNER JOIN ratings AS T2 ON "
                   "T1.movie_id = T2.movie_id GROUP BY T1.movie_id ORDER BY "
                   "COUNT(*) DESC LIMIT 1",
                   "moderate"));
  arr.push_back(dp(17, "movie_platform",
                   "What is the average score of the movie 'Inception'?", "",
                   "SELECT AVG(T2.score) FROM movies AS T1 INNER JOIN ratings AS "
                   "T2 ON T1.movie_id = T2.movie_id WHERE T1.title = 'Inception'",
                   "simple"));
  arr.push_back(dp(18, "movie_platform", "How many movies are in the catalog?",
                   "", "SELECT COUNT(*) FROM movies", "simple"));
  arr.push_back(dp(19, "movie_platform",
                   "Which movies have no ratings at all?", "",
                   "SELECT T1.title FROM movies AS T1 LEFT JOIN ratings AS T2 ON "
                   "T1.movie_id = T2.movie_id WHERE T2.rating_id IS NULL",
                   "challenging"));
  arr.push_back(dp(20, "movie_platform",
                   "What is the highest score given to 'Interstellar'?", "",
                   "SELECT MAX(T2.score) FROM movies AS T1 INNER JOIN ratings AS "
                   "T2 ON T1.movie_id = T2.movie_id WHERE T1.title = "
                   "'Interstellar'",
                   "simple"));

  // retail_orders
  arr.push_back(dp(21, "retail_orders",
                   "What is the total order amount in the west region?", "",
                   "SELECT SUM(amount) FROM orders WHERE region = 'west'",
                   "simple"));
  arr.push_back(dp(22, "retail_orders",
                   "Which customers placed an order with no recorded discount?",
                   "no recorded discount refers to discount IS NULL",
                   "SELECT DISTINCT customer FROM orders WHERE discount IS NULL",
                   "moderate"));
  arr.push_back(dp(23, "retail_orders", "How many orders exceed 100 in amount?",
                   "", "SELECT COUNT(*) FROM orders WHERE amount > 100", "simple"));
  arr.push_back(dp(24, "retail_orders",
                   "What is the largest single order amount?", "",
                   "SELECT MAX(amount) FROM orders", "simple"));
  arr.push_back(dp(25, "retail_orders",
                   "List each region with its average order amount.", "",
                   "SELECT region, AVG(amount) FROM orders GROUP BY region",
                   "challenging"));

  return arr;
}

}  // namespace

DemoBenchmark write_demo_benchmark(const std::string& dir) {
  fs::path base(dir);
  fs::path db_root = base / "databases";
  fs::create_directories(db_root);

  build_california_schools(db_path_for(db_root, "california_schools"));
  build_superhero(db_path_for(db_root, "superhero"));
  build_card_games(db_path_for(db_root, "card_games"));
  build_movie_platform(db_path_for(db_root, "movie_platform"));
  build_retail_orders(db_path_for(db_root, "retail_orders"));

  fs::path split_path = base / "split.json";
  std::ofstream out(split_path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write split file: " + split_path.string());
  out << demo_split().dump(2) << "\n";

  return {db_root.string(), split_path.string()};
}

std::string write_demo_stub_script(
    const std::string& path, const std::string& db_root,
    const std::string& split_path,
    const std::vector<std::int64_t>& wrong_majority_ids) {
  DatabaseCatalog catalog = DatabaseCatalog::discover(db_root);
  std::vector<Datapoint> dps = load_split(split_path, catalog);
  const PromptTemplate tpl = PromptTemplate::standard();
  const std::set<std::int64_t> wrong_ids(wrong_majority_ids.begin(),
                                         wrong_majority_ids.end());

  std::map<std::string, SchemaDescription> schemas;
  json script = json::object();
  for (const auto& datapoint : dps) {
    auto it = schemas.find(datapoint.db_id);
    if (it == schemas.end()) {
      it = schemas
               .emplace(datapoint.db_id,
                        describe_schema(catalog.resolve(datapoint.db_id), 3))
               .first;
    }
    const std::string prompt = render_prompt(datapoint, it->second, tpl);

    auto fenced = [](const std::string& sql, const std::string& lead) {
      return lead + "\n```sql\n" + sql + "\n```\n";
    };
    const std::string gold = fenced(datapoint.gold_sql, "The query follows.");
    const std::string off_result =
        fenced("SELECT 'divergent-" + std::to_string(datapoint.question_id) + "'",
               "Here is the query.");
    const std::string unparsable = "```sql\nSELEC 1\n```\n";

    json traces = json::array();
    const bool wrong = wrong_ids.count(datapoint.question_id) > 0;
    const std::string& majority = wrong ? off_result : gold;
    const std::string& minority = wrong ? gold : off_result;
    for (int i = 0; i < 4; ++i) traces.push_back(majority);
    for (int i = 0; i < 2; ++i) traces.push_back(minority);
    traces.push_back(unparsable);
    script[fnv1a64_hex(prompt)] = std::move(traces);
  }

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write stub script: " + path);
  out << script.dump(2) << "\n";
  return path;
}

}  // namespace sqlverify
