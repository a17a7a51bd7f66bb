#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace hyq {

// Open string domain, or a fixed value list the model must select from.
struct ValueDomain {
  enum class Kind { Free, Closed };
  Kind kind = Kind::Free;
  std::vector<std::string> values; // non-empty and duplicate-free when Closed

  bool closed() const { return kind == Kind::Closed; }
};

enum class Cardinality { One, Many };

struct AttributeSpec {
  std::string name;
  ValueDomain domain;
  Cardinality cardinality = Cardinality::One;
};

struct KeyAttr {
  std::string name;
  std::string semantic_type = "text";
};

// Declaration of an LLM-backed table. Keys come from `base_table`; the
// generated attributes are what the provider fills in.
struct VirtualTableSpec {
  std::string name;
  std::string base_table;
  std::vector<KeyAttr> key_attrs;
  std::vector<AttributeSpec> gen_attrs;
  // Demonstration rows, each of arity |key_attrs| + |gen_attrs| (many-valued
  // attributes appear condensed). Used in declaration order for k-shot prompts.
  std::vector<std::vector<std::string>> fewshot_pool;
  std::string task_instruction;

  size_t arity() const { return key_attrs.size() + gen_attrs.size(); }
  const AttributeSpec* find_gen_attr(const std::string& name) const;
  bool has_column(const std::string& name) const;
};

struct TableSchema {
  std::string name;
  std::vector<std::pair<std::string, std::string>> columns; // (name, declared type)

  bool has_column(const std::string& col) const;
  std::string column_decl_type(const std::string& col) const;
};

struct DatabaseHandle {
  std::string id;
  std::string location; // path to the sqlite file
  std::vector<TableSchema> schema;

  const TableSchema* find_table(const std::string& name) const;
  // Re-reads the schema from the file (cache tables appear after materialization).
  void refresh_schema();
};

DatabaseHandle open_database(const std::string& id, const std::string& path);

struct Catalog {
  std::vector<DatabaseHandle> databases;
  std::vector<VirtualTableSpec> specs;

  const DatabaseHandle* find_database(const std::string& id) const;
  const VirtualTableSpec* find_spec(const std::string& name) const;
  bool empty() const { return databases.empty() && specs.empty(); }
};

// Config document shape (format_version 1):
//   {"format_version": 1,
//    "databases": [{"id": "...", "path": "..."}],
//    "specs": [ <spec object>... ]}
// Referenced database files must exist; specs are checked structurally here
// and against data only by validate_spec.
Catalog load_catalog(const nlohmann::json& config);
Catalog load_catalog_file(const std::string& path);

VirtualTableSpec spec_from_json(const nlohmann::json& j);
nlohmann::json spec_to_json(const VirtualTableSpec& spec);

struct ValidationIssue {
  enum class Code {
    MissingBaseTable,
    MissingColumn,
    KeyNotUnique,
    NullKey,
    EmptyKey,
    EmptyBaseTable, // warning
  };
  Code code;
  bool warning = false;
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;

  bool ok() const;           // no non-warning issues
  bool has_warnings() const;
  std::string summary() const;
};

// Confirms every key column exists in the base table and that the key
// combination is duplicate-free (and NULL/empty-free) across its rows.
ValidationReport validate_spec(const VirtualTableSpec& spec, const DatabaseHandle& db);

} // namespace hyq
