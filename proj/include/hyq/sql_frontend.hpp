#pragma once

#include "hyq/catalog.hpp"

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace hyq::sql {

enum class TokenKind { Ident, String, Number, Punct, End };

struct Token {
  TokenKind kind = TokenKind::End;
  std::string text;  // raw source slice, quotes included
  std::string value; // identifiers unquoted, strings unescaped
  bool quoted_ident = false;
  size_t begin = 0;
  size_t end = 0;

  bool is_keyword(std::string_view kw) const;
};

std::vector<Token> lex(std::string_view sql);

enum class RelationKind { Base, Virtual };

struct RelationRef {
  std::string name;  // as written (unquoted)
  std::string alias; // empty when none
  RelationKind kind = RelationKind::Base;
  size_t name_token = 0; // rewrite target
  const VirtualTableSpec* spec = nullptr;

  const std::string& effective_name() const { return alias.empty() ? name : alias; }
};

struct ColumnRef {
  int relation = -1;
  std::string column;
};

// One conjunct of a WHERE or ON condition, with its exact source slice so the
// pushdown planner can splice it into a key query unchanged.
struct Predicate {
  std::string text;
  size_t begin = 0;
  size_t end = 0;
  std::set<int> relations;
  bool deterministic = true;
  bool is_join_equality = false;
  ColumnRef lhs;
  ColumnRef rhs;
};

struct HybridQueryAst {
  std::string original_sql;
  std::vector<Token> tokens;
  std::vector<RelationRef> relations;
  std::vector<Predicate> join_conditions; // cross-relation column equalities
  std::vector<Predicate> filters;         // everything else, WHERE and ON conjuncts
  bool has_order_by = false;
  std::optional<std::int64_t> limit;
  std::vector<size_t> qualifier_tokens; // identifier tokens immediately followed by '.'

  size_t virtual_count() const;
  std::vector<const RelationRef*> virtual_relations() const;
};

// Parses a single SELECT (inner joins, WHERE, GROUP BY, HAVING, ORDER BY,
// LIMIT) and classifies every FROM item as a base table or a catalog virtual
// table. Outer joins, subqueries, and compound selects are rejected.
HybridQueryAst parse_hybrid(std::string_view sql, const Catalog& catalog, const DatabaseHandle& db);

struct CacheNaming {
  std::string prefix = "llm_cache_";
  std::string name(const std::string& spec_name) const { return prefix + spec_name; }
};

// Replaces each virtual relation name (and its qualifier uses, when the
// relation is not aliased) with its cache table name. Everything else is
// emitted byte for byte.
std::string rewrite_to_cache(const HybridQueryAst& ast, const CacheNaming& naming = {});

// The subset of filters that can restrict the spec's key tuples before
// generation: conjuncts referencing only the spec's base table, and only when
// the query joins the virtual relation to that base table on every key
// attribute. Anything ambiguous yields an empty set (full generation).
std::vector<Predicate> extract_pushdown_predicates(const HybridQueryAst& ast,
                                                   const VirtualTableSpec& spec);

// Lexical check used for result-ordering semantics; works on arbitrary SQL,
// including gold queries outside the supported hybrid surface.
bool has_top_level_order_by(std::string_view sql);

} // namespace hyq::sql
