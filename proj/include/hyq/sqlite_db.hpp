#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

struct sqlite3;
struct sqlite3_stmt;

namespace hyq {

// NULL, INTEGER, REAL, TEXT. BLOBs are surfaced as text.
using Value = std::variant<std::monostate, std::int64_t, double, std::string>;

using Row = std::vector<Value>;

bool value_is_null(const Value& v);
std::string value_to_text(const Value& v);

class SqliteDb {
public:
  enum class Mode { ReadOnly, ReadWrite, Create };

  explicit SqliteDb(const std::string& path, Mode mode = Mode::Create);
  ~SqliteDb();

  SqliteDb(const SqliteDb&) = delete;
  SqliteDb& operator=(const SqliteDb&) = delete;
  SqliteDb(SqliteDb&& other) noexcept;
  SqliteDb& operator=(SqliteDb&& other) noexcept;

  const std::string& path() const { return path_; }
  sqlite3* raw() { return db_; }

  // Runs one or more statements, discarding any result rows.
  void exec(const std::string& sql);

  struct QueryResult {
    std::vector<std::string> columns;
    std::vector<Row> rows;
  };

  QueryResult query(const std::string& sql, const std::vector<Value>& params = {});

  std::int64_t query_int(const std::string& sql, const std::vector<Value>& params = {});

  // Returns rows affected.
  int execute(const std::string& sql, const std::vector<Value>& params = {});

  bool table_exists(const std::string& name);
  std::vector<std::string> table_names();
  // (column name, declared type) in schema order.
  std::vector<std::pair<std::string, std::string>> table_columns(const std::string& table);

  // Aborts long-running statements; 0 disables the cap.
  void set_query_timeout_ms(std::int64_t ms);

private:
  sqlite3* db_ = nullptr;
  std::string path_;
  std::int64_t timeout_ms_ = 0;

  void arm_timeout();
};

// Rolls back unless commit() was called.
class Transaction {
public:
  explicit Transaction(SqliteDb& db);
  ~Transaction();
  Transaction(const Transaction&) = delete;
  Transaction& operator=(const Transaction&) = delete;

  void commit();

private:
  SqliteDb& db_;
  bool done_ = false;
};

} // namespace hyq
