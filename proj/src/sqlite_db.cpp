#include "hyq/sqlite_db.hpp"

#include "hyq/error.hpp"

#include <sqlite3.h>

#include <chrono>
#include <cstring>

namespace hyq {

bool value_is_null(const Value& v) { return std::holds_alternative<std::monostate>(v); }

std::string value_to_text(const Value& v) {
  if (std::holds_alternative<std::monostate>(v)) return "";
  if (const auto* i = std::get_if<std::int64_t>(&v)) return std::to_string(*i);
  if (const auto* d = std::get_if<double>(&v)) {
    char buf[32];
    snprintf(buf, sizeof(buf), "%.17g", *d);
    return buf;
  }
  return std::get<std::string>(v);
}

namespace {

void bind_params(sqlite3_stmt* stmt, const std::vector<Value>& params) {
  for (size_t i = 0; i < params.size(); ++i) {
    int idx = static_cast<int>(i) + 1;
    const Value& v = params[i];
    if (std::holds_alternative<std::monostate>(v)) {
      sqlite3_bind_null(stmt, idx);
    } else if (const auto* iv = std::get_if<std::int64_t>(&v)) {
      sqlite3_bind_int64(stmt, idx, *iv);
    } else if (const auto* dv = std::get_if<double>(&v)) {
      sqlite3_bind_double(stmt, idx, *dv);
    } else {
      const auto& s = std::get<std::string>(v);
      sqlite3_bind_text(stmt, idx, s.data(), static_cast<int>(s.size()), SQLITE_TRANSIENT);
    }
  }
}

Value column_value(sqlite3_stmt* stmt, int col) {
  switch (sqlite3_column_type(stmt, col)) {
    case SQLITE_NULL:
      return std::monostate{};
    case SQLITE_INTEGER:
      return static_cast<std::int64_t>(sqlite3_column_int64(stmt, col));
    case SQLITE_FLOAT:
      return sqlite3_column_double(stmt, col);
    default: {
      const unsigned char* t = sqlite3_column_text(stmt, col);
      int n = sqlite3_column_bytes(stmt, col);
      return std::string(reinterpret_cast<const char*>(t), static_cast<size_t>(n));
    }
  }
}

struct StmtGuard {
  sqlite3_stmt* stmt = nullptr;
  ~StmtGuard() {
    if (stmt) sqlite3_finalize(stmt);
  }
};

} // namespace

SqliteDb::SqliteDb(const std::string& path, Mode mode) : path_(path) {
  int flags = 0;
  switch (mode) {
    case Mode::ReadOnly: flags = SQLITE_OPEN_READONLY; break;
    case Mode::ReadWrite: flags = SQLITE_OPEN_READWRITE; break;
    case Mode::Create: flags = SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE; break;
  }
  int rc = sqlite3_open_v2(path.c_str(), &db_, flags, nullptr);
  if (rc != SQLITE_OK) {
    std::string msg = db_ ? sqlite3_errmsg(db_) : "cannot open database";
    if (db_) sqlite3_close(db_);
    db_ = nullptr;
    throw SqlError("cannot open database '" + path + "': " + msg);
  }
  sqlite3_busy_timeout(db_, 5000);
}

SqliteDb::~SqliteDb() {
  if (db_) sqlite3_close(db_);
}

SqliteDb::SqliteDb(SqliteDb&& other) noexcept
    : db_(other.db_), path_(std::move(other.path_)), timeout_ms_(other.timeout_ms_) {
  other.db_ = nullptr;
}

SqliteDb& SqliteDb::operator=(SqliteDb&& other) noexcept {
  if (this != &other) {
    if (db_) sqlite3_close(db_);
    db_ = other.db_;
    path_ = std::move(other.path_);
    timeout_ms_ = other.timeout_ms_;
    other.db_ = nullptr;
  }
  return *this;
}

void SqliteDb::set_query_timeout_ms(std::int64_t ms) { timeout_ms_ = ms; }

namespace {
struct Deadline {
  std::chrono::steady_clock::time_point at;
};

int progress_cb(void* ctx) {
  auto* d = static_cast<Deadline*>(ctx);
  return std::chrono::steady_clock::now() > d->at ? 1 : 0;
}
} // namespace

void SqliteDb::arm_timeout() {
  static thread_local Deadline deadline;
  if (timeout_ms_ > 0) {
    deadline.at = std::chrono::steady_clock::now() + std::chrono::milliseconds(timeout_ms_);
    sqlite3_progress_handler(db_, 1000, progress_cb, &deadline);
  } else {
    sqlite3_progress_handler(db_, 0, nullptr, nullptr);
  }
}

void SqliteDb::exec(const std::string& sql) {
  arm_timeout();
  char* err = nullptr;
  int rc = sqlite3_exec(db_, sql.c_str(), nullptr, nullptr, &err);
  if (rc != SQLITE_OK) {
    std::string msg = err ? err : sqlite3_errmsg(db_);
    sqlite3_free(err);
    throw SqlError(msg);
  }
}

SqliteDb::QueryResult SqliteDb::query(const std::string& sql, const std::vector<Value>& params) {
  arm_timeout();
  StmtGuard g;
  int rc = sqlite3_prepare_v2(db_, sql.c_str(), -1, &g.stmt, nullptr);
  if (rc != SQLITE_OK) throw SqlError(std::string(sqlite3_errmsg(db_)));
  bind_params(g.stmt, params);

  QueryResult out;
  int ncols = sqlite3_column_count(g.stmt);
  for (int i = 0; i < ncols; ++i) {
    const char* name = sqlite3_column_name(g.stmt, i);
    out.columns.push_back(name ? name : "");
  }
  while ((rc = sqlite3_step(g.stmt)) == SQLITE_ROW) {
    Row row;
    row.reserve(static_cast<size_t>(ncols));
    for (int i = 0; i < ncols; ++i) row.push_back(column_value(g.stmt, i));
    out.rows.push_back(std::move(row));
  }
  if (rc != SQLITE_DONE) throw SqlError(std::string(sqlite3_errmsg(db_)));
  return out;
}

std::int64_t SqliteDb::query_int(const std::string& sql, const std::vector<Value>& params) {
  auto res = query(sql, params);
  if (res.rows.empty() || res.rows[0].empty()) throw SqlError("query returned no value: " + sql);
  const Value& v = res.rows[0][0];
  if (const auto* i = std::get_if<std::int64_t>(&v)) return *i;
  if (const auto* d = std::get_if<double>(&v)) return static_cast<std::int64_t>(*d);
  throw SqlError("query did not return a number: " + sql);
}

int SqliteDb::execute(const std::string& sql, const std::vector<Value>& params) {
  arm_timeout();
  StmtGuard g;
  int rc = sqlite3_prepare_v2(db_, sql.c_str(), -1, &g.stmt, nullptr);
  if (rc != SQLITE_OK) throw SqlError(std::string(sqlite3_errmsg(db_)));
  bind_params(g.stmt, params);
  rc = sqlite3_step(g.stmt);
  if (rc != SQLITE_DONE && rc != SQLITE_ROW) throw SqlError(std::string(sqlite3_errmsg(db_)));
  return sqlite3_changes(db_);
}

bool SqliteDb::table_exists(const std::string& name) {
  return query_int("SELECT COUNT(*) FROM sqlite_master WHERE type IN ('table','view') AND lower(name) = lower(?)",
                   {Value(name)}) > 0;
}

std::vector<std::string> SqliteDb::table_names() {
  auto res = query(
      "SELECT name FROM sqlite_master WHERE type = 'table' AND name NOT LIKE 'sqlite_%' ORDER BY name");
  std::vector<std::string> names;
  names.reserve(res.rows.size());
  for (const auto& row : res.rows) names.push_back(value_to_text(row[0]));
  return names;
}

std::vector<std::pair<std::string, std::string>> SqliteDb::table_columns(const std::string& table) {
  // table_info quoting: wrap in quotes to survive odd names.
  std::string quoted = "\"";
  for (char c : table) {
    if (c == '"') quoted += "\"\"";
    else quoted += c;
  }
  quoted += "\"";
  auto res = query("PRAGMA table_info(" + quoted + ")");
  std::vector<std::pair<std::string, std::string>> cols;
  for (const auto& row : res.rows) {
    // table_info columns: cid, name, type, notnull, dflt_value, pk
    cols.emplace_back(value_to_text(row[1]), value_to_text(row[2]));
  }
  return cols;
}

Transaction::Transaction(SqliteDb& db) : db_(db) { db_.exec("BEGIN"); }

Transaction::~Transaction() {
  if (!done_) {
    try {
      db_.exec("ROLLBACK");
    } catch (...) {
    }
  }
}

void Transaction::commit() {
  db_.exec("COMMIT");
  done_ = true;
}

} // namespace hyq
