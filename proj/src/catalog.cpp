#include "hyq/catalog.hpp"

#include "hyq/error.hpp"
#include "hyq/sqlite_db.hpp"
#include "hyq/text.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <set>

namespace hyq {

using nlohmann::json;

const AttributeSpec* VirtualTableSpec::find_gen_attr(const std::string& n) const {
  for (const auto& a : gen_attrs) {
    if (ci_equal(a.name, n)) return &a;
  }
  return nullptr;
}

bool VirtualTableSpec::has_column(const std::string& n) const {
  for (const auto& k : key_attrs) {
    if (ci_equal(k.name, n)) return true;
  }
  return find_gen_attr(n) != nullptr;
}

bool TableSchema::has_column(const std::string& col) const {
  for (const auto& [name, type] : columns) {
    if (ci_equal(name, col)) return true;
  }
  return false;
}

std::string TableSchema::column_decl_type(const std::string& col) const {
  for (const auto& [name, type] : columns) {
    if (ci_equal(name, col)) return type;
  }
  return "";
}

const TableSchema* DatabaseHandle::find_table(const std::string& name) const {
  for (const auto& t : schema) {
    if (ci_equal(t.name, name)) return &t;
  }
  return nullptr;
}

void DatabaseHandle::refresh_schema() {
  SqliteDb db(location, SqliteDb::Mode::ReadOnly);
  schema.clear();
  for (const auto& table : db.table_names()) {
    TableSchema ts;
    ts.name = table;
    ts.columns = db.table_columns(table);
    schema.push_back(std::move(ts));
  }
}

DatabaseHandle open_database(const std::string& id, const std::string& path) {
  if (!std::filesystem::exists(path)) {
    throw ConfigError("database file does not exist: " + path);
  }
  DatabaseHandle h;
  h.id = id;
  h.location = path;
  h.refresh_schema();
  return h;
}

const DatabaseHandle* Catalog::find_database(const std::string& id) const {
  for (const auto& d : databases) {
    if (d.id == id) return &d;
  }
  return nullptr;
}

const VirtualTableSpec* Catalog::find_spec(const std::string& name) const {
  for (const auto& s : specs) {
    if (ci_equal(s.name, name)) return &s;
  }
  return nullptr;
}

namespace {

Cardinality cardinality_from_string(const std::string& s) {
  if (s == "one") return Cardinality::One;
  if (s == "many") return Cardinality::Many;
  throw ConfigError("invalid cardinality '" + s + "' (expected \"one\" or \"many\")");
}

std::string cardinality_to_string(Cardinality c) {
  return c == Cardinality::One ? "one" : "many";
}

void check_spec_invariants(const VirtualTableSpec& spec) {
  if (!is_identifier(spec.name)) {
    throw ConfigError("spec name '" + spec.name + "' is not a valid identifier");
  }
  if (to_lower(spec.name).rfind("llm_cache_", 0) == 0) {
    throw ConfigError("spec name '" + spec.name + "' uses the reserved cache prefix");
  }
  if (spec.base_table.empty()) {
    throw ConfigError("spec '" + spec.name + "' has no base_table");
  }
  if (spec.key_attrs.empty()) {
    throw ConfigError("spec '" + spec.name + "' has no key attributes");
  }
  if (spec.gen_attrs.empty()) {
    throw ConfigError("spec '" + spec.name + "' has no generated attributes");
  }
  std::set<std::string> names;
  for (const auto& k : spec.key_attrs) {
    if (!names.insert(to_lower(k.name)).second) {
      throw ConfigError("spec '" + spec.name + "': duplicate attribute '" + k.name + "'");
    }
  }
  for (const auto& a : spec.gen_attrs) {
    if (!names.insert(to_lower(a.name)).second) {
      throw ConfigError("spec '" + spec.name + "': duplicate attribute '" + a.name + "'");
    }
    if (a.domain.closed()) {
      if (a.domain.values.empty()) {
        throw ConfigError("spec '" + spec.name + "': closed domain for '" + a.name + "' is empty");
      }
      std::set<std::string> seen;
      for (const auto& v : a.domain.values) {
        if (v.empty()) {
          throw ConfigError("spec '" + spec.name + "': closed domain for '" + a.name +
                            "' contains an empty value");
        }
        if (!seen.insert(v).second) {
          throw ConfigError("spec '" + spec.name + "': closed domain for '" + a.name +
                            "' contains duplicate value '" + v + "'");
        }
      }
    }
  }
  for (const auto& row : spec.fewshot_pool) {
    if (row.size() != spec.arity()) {
      throw ConfigError("spec '" + spec.name + "': fewshot row has arity " +
                        std::to_string(row.size()) + ", expected " + std::to_string(spec.arity()));
    }
  }
}

} // namespace

VirtualTableSpec spec_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("spec must be a JSON object");
  VirtualTableSpec spec;
  spec.name = j.at("name").get<std::string>();
  spec.base_table = j.at("base_table").get<std::string>();
  for (const auto& k : j.at("key_attrs")) {
    KeyAttr attr;
    if (k.is_string()) {
      attr.name = k.get<std::string>();
    } else {
      attr.name = k.at("name").get<std::string>();
      attr.semantic_type = k.value("semantic_type", "text");
    }
    spec.key_attrs.push_back(std::move(attr));
  }
  for (const auto& g : j.at("gen_attrs")) {
    AttributeSpec attr;
    attr.name = g.at("name").get<std::string>();
    attr.cardinality = cardinality_from_string(g.value("cardinality", "one"));
    const auto& dom = g.at("domain");
    std::string kind = dom.at("kind").get<std::string>();
    if (kind == "free") {
      attr.domain.kind = ValueDomain::Kind::Free;
    } else if (kind == "closed") {
      attr.domain.kind = ValueDomain::Kind::Closed;
      attr.domain.values = dom.at("values").get<std::vector<std::string>>();
    } else {
      throw ConfigError("invalid domain kind '" + kind + "'");
    }
    spec.gen_attrs.push_back(std::move(attr));
  }
  spec.task_instruction = j.value("task_instruction", "");
  if (j.contains("fewshot_pool")) {
    for (const auto& row : j.at("fewshot_pool")) {
      spec.fewshot_pool.push_back(row.get<std::vector<std::string>>());
    }
  }
  check_spec_invariants(spec);
  return spec;
}

json spec_to_json(const VirtualTableSpec& spec) {
  json j;
  j["format_version"] = 1;
  j["name"] = spec.name;
  j["base_table"] = spec.base_table;
  j["key_attrs"] = json::array();
  for (const auto& k : spec.key_attrs) {
    j["key_attrs"].push_back({{"name", k.name}, {"semantic_type", k.semantic_type}});
  }
  j["gen_attrs"] = json::array();
  for (const auto& a : spec.gen_attrs) {
    json g;
    g["name"] = a.name;
    g["cardinality"] = cardinality_to_string(a.cardinality);
    if (a.domain.closed()) {
      g["domain"] = {{"kind", "closed"}, {"values", a.domain.values}};
    } else {
      g["domain"] = {{"kind", "free"}};
    }
    j["gen_attrs"].push_back(std::move(g));
  }
  j["task_instruction"] = spec.task_instruction;
  j["fewshot_pool"] = spec.fewshot_pool;
  return j;
}

Catalog load_catalog(const json& config) {
  if (!config.is_object()) throw ConfigError("catalog config must be a JSON object");
  Catalog catalog;
  if (config.contains("databases")) {
    for (const auto& d : config.at("databases")) {
      std::string id = d.at("id").get<std::string>();
      std::string path = d.at("path").get<std::string>();
      for (const auto& existing : catalog.databases) {
        if (existing.id == id) throw ConfigError("duplicate database id '" + id + "'");
      }
      catalog.databases.push_back(open_database(id, path));
    }
  }
  if (config.contains("specs")) {
    for (const auto& s : config.at("specs")) {
      VirtualTableSpec spec = spec_from_json(s);
      if (catalog.find_spec(spec.name)) {
        throw ConfigError("duplicate spec name '" + spec.name + "'");
      }
      catalog.specs.push_back(std::move(spec));
    }
  }
  // A spec name that shadows a base table would make relation references ambiguous.
  for (const auto& spec : catalog.specs) {
    for (const auto& db : catalog.databases) {
      if (db.find_table(spec.name)) {
        throw ConfigError("spec name '" + spec.name + "' collides with a table in database '" +
                          db.id + "'");
      }
    }
  }
  return catalog;
}

Catalog load_catalog_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open catalog config: " + path);
  json config;
  try {
    in >> config;
  } catch (const json::exception& e) {
    throw ConfigError("malformed catalog config " + path + ": " + e.what());
  }
  return load_catalog(config);
}

bool ValidationReport::ok() const {
  for (const auto& i : issues) {
    if (!i.warning) return false;
  }
  return true;
}

bool ValidationReport::has_warnings() const {
  for (const auto& i : issues) {
    if (i.warning) return true;
  }
  return false;
}

std::string ValidationReport::summary() const {
  if (issues.empty()) return "ok";
  std::string out;
  for (const auto& i : issues) {
    if (!out.empty()) out += "; ";
    out += (i.warning ? "warning: " : "error: ") + i.message;
  }
  return out;
}

ValidationReport validate_spec(const VirtualTableSpec& spec, const DatabaseHandle& db) {
  ValidationReport report;
  const TableSchema* table = db.find_table(spec.base_table);
  if (!table) {
    report.issues.push_back({ValidationIssue::Code::MissingBaseTable, false,
                             "base table '" + spec.base_table + "' not found in database '" +
                                 db.id + "'"});
    return report;
  }
  bool columns_ok = true;
  for (const auto& k : spec.key_attrs) {
    if (!table->has_column(k.name)) {
      columns_ok = false;
      report.issues.push_back({ValidationIssue::Code::MissingColumn, false,
                               "key column '" + k.name + "' not found in table '" +
                                   spec.base_table + "'"});
    }
  }
  if (!columns_ok) return report;

  SqliteDb conn(db.location, SqliteDb::Mode::ReadOnly);
  auto q = [&](const std::string& expr) { return "\"" + expr + "\""; };
  std::vector<std::string> key_cols;
  for (const auto& k : spec.key_attrs) key_cols.push_back(q(k.name));
  std::string cols = join(key_cols, ", ");
  std::string tbl = q(spec.base_table);

  std::int64_t total = conn.query_int("SELECT COUNT(*) FROM " + tbl);
  if (total == 0) {
    report.issues.push_back({ValidationIssue::Code::EmptyBaseTable, true,
                             "base table '" + spec.base_table + "' is empty"});
    return report;
  }

  std::vector<std::string> null_checks, empty_checks;
  for (const auto& k : spec.key_attrs) {
    null_checks.push_back(q(k.name) + " IS NULL");
    empty_checks.push_back("TRIM(CAST(" + q(k.name) + " AS TEXT)) = ''");
  }
  std::int64_t nulls =
      conn.query_int("SELECT COUNT(*) FROM " + tbl + " WHERE " + join(null_checks, " OR "));
  if (nulls > 0) {
    report.issues.push_back({ValidationIssue::Code::NullKey, false,
                             std::to_string(nulls) + " row(s) of '" + spec.base_table +
                                 "' have NULL in a key column; a NULL key cannot identify an entity"});
  }
  std::int64_t empties = conn.query_int("SELECT COUNT(*) FROM " + tbl + " WHERE NOT (" +
                                        join(null_checks, " OR ") + ") AND (" +
                                        join(empty_checks, " OR ") + ")");
  if (empties > 0) {
    report.issues.push_back({ValidationIssue::Code::EmptyKey, false,
                             std::to_string(empties) + " row(s) of '" + spec.base_table +
                                 "' have an empty string in a key column"});
  }
  std::int64_t distinct =
      conn.query_int("SELECT COUNT(*) FROM (SELECT DISTINCT " + cols + " FROM " + tbl + ")");
  if (distinct != total) {
    report.issues.push_back(
        {ValidationIssue::Code::KeyNotUnique, false,
         "key combination (" + join(key_cols, ", ") + ") has duplicates in '" + spec.base_table +
             "': " + std::to_string(total) + " rows but " + std::to_string(distinct) +
             " distinct keys"});
  }
  return report;
}

} // namespace hyq
