#include "hyq/sql_frontend.hpp"

#include "hyq/error.hpp"
#include "hyq/text.hpp"

#include <algorithm>
#include <optional>

namespace hyq::sql {

namespace {

const char* kReservedWords[] = {
    "SELECT", "DISTINCT", "ALL",   "FROM",    "WHERE",  "GROUP", "BY",      "HAVING",
    "ORDER",  "LIMIT",    "OFFSET", "JOIN",   "INNER",  "LEFT",  "RIGHT",   "FULL",
    "OUTER",  "CROSS",    "NATURAL", "ON",    "USING",  "AND",   "OR",      "NOT",
    "IN",     "IS",       "NULL",  "LIKE",    "GLOB",   "BETWEEN", "AS",    "ASC",
    "DESC",   "UNION",    "EXCEPT", "INTERSECT", "CASE", "WHEN", "THEN",   "ELSE",
    "END",    "EXISTS",   "COLLATE"};

bool is_reserved(const Token& t) {
  if (t.kind != TokenKind::Ident || t.quoted_ident) return false;
  for (const char* kw : kReservedWords) {
    if (ci_equal(t.value, kw)) return true;
  }
  return false;
}

// Functions whose results vary between invocations; predicates containing
// them must never be pushed into a key plan.
bool is_nondeterministic_fn(const std::string& name) {
  static const char* fns[] = {"random", "randomblob", "changes", "total_changes",
                              "last_insert_rowid"};
  for (const char* f : fns) {
    if (ci_equal(name, f)) return true;
  }
  return false;
}

struct OperandInfo {
  std::set<int> rels;
  bool deterministic = true;
  std::optional<ColumnRef> col; // set when the operand is exactly one column reference
};

struct CondNode {
  enum class Kind { And, Or, Leaf };
  Kind kind = Kind::Leaf;
  size_t begin_tok = 0;
  size_t end_tok = 0; // [begin_tok, end_tok)
  std::vector<CondNode> children;
  std::set<int> rels;
  bool deterministic = true;
  bool is_join_equality = false;
  ColumnRef lhs;
  ColumnRef rhs;
};

class Parser {
public:
  Parser(std::string_view sql, const Catalog& catalog, const DatabaseHandle& db)
      : catalog_(catalog), db_(db) {
    ast_.original_sql = std::string(sql);
    ast_.tokens = lex(sql);
  }

  HybridQueryAst parse() {
    parse_statement();
    collect_qualifier_tokens();
    return std::move(ast_);
  }

private:
  const Catalog& catalog_;
  const DatabaseHandle& db_;
  HybridQueryAst ast_;
  size_t pos_ = 0;
  bool resolve_ = false;

  const Token& cur() const { return ast_.tokens[pos_]; }
  const Token& peek(size_t k = 1) const {
    size_t i = std::min(pos_ + k, ast_.tokens.size() - 1);
    return ast_.tokens[i];
  }
  void advance() {
    if (pos_ + 1 < ast_.tokens.size()) ++pos_;
  }
  bool at_end() const { return cur().kind == TokenKind::End; }

  [[noreturn]] void fail(const std::string& msg) const {
    const Token& t = cur();
    std::string where = t.kind == TokenKind::End
                            ? "at end of input"
                            : "near '" + t.text + "' (offset " + std::to_string(t.begin) + ")";
    throw SqlError("syntax error " + where + ": " + msg);
  }

  bool accept_kw(std::string_view kw) {
    if (cur().is_keyword(kw)) {
      advance();
      return true;
    }
    return false;
  }
  void expect_kw(std::string_view kw) {
    if (!accept_kw(kw)) fail("expected " + std::string(kw));
  }
  bool accept_punct(std::string_view p) {
    if (cur().kind == TokenKind::Punct && cur().value == p) {
      advance();
      return true;
    }
    return false;
  }
  void expect_punct(std::string_view p) {
    if (!accept_punct(p)) fail("expected '" + std::string(p) + "'");
  }

  // ---- statement ----

  void parse_statement() {
    if (!cur().is_keyword("SELECT")) {
      if (cur().kind == TokenKind::Ident) {
        static const char* stmts[] = {"INSERT", "UPDATE", "DELETE", "CREATE", "DROP",
                                      "ALTER",  "WITH",   "PRAGMA", "EXPLAIN", "VACUUM",
                                      "BEGIN",  "COMMIT", "REPLACE"};
        for (const char* s : stmts) {
          if (ci_equal(cur().value, s)) {
            throw SqlError("unsupported statement kind '" + to_lower(cur().value) +
                           "': only single SELECT statements are supported");
          }
        }
      }
      fail("expected SELECT");
    }
    advance();
    if (accept_kw("DISTINCT")) {
    } else {
      accept_kw("ALL");
    }
    parse_select_list();
    if (accept_kw("FROM")) parse_from();
    if (accept_kw("WHERE")) {
      resolve_ = true;
      CondNode cond = parse_or();
      resolve_ = false;
      add_conjuncts(cond);
    }
    if (accept_kw("GROUP")) {
      expect_kw("BY");
      parse_expr_list_unresolved();
    }
    if (accept_kw("HAVING")) {
      // Post-aggregation condition: parsed for syntax, never a pushdown source.
      parse_or();
    }
    if (accept_kw("ORDER")) {
      expect_kw("BY");
      ast_.has_order_by = true;
      parse_order_items();
    }
    if (accept_kw("LIMIT")) parse_limit();
    accept_punct(";");
    if (!at_end()) {
      if (cur().is_keyword("UNION") || cur().is_keyword("EXCEPT") || cur().is_keyword("INTERSECT")) {
        fail("compound selects are not supported");
      }
      fail("unexpected trailing input");
    }
  }

  void parse_select_list() {
    do {
      if (accept_punct("*")) continue;
      parse_or();
      if (accept_kw("AS")) {
        if (cur().kind != TokenKind::Ident) fail("expected alias after AS");
        advance();
      } else if (cur().kind == TokenKind::Ident && !is_reserved(cur()) &&
                 peek().kind != TokenKind::Punct) {
        // bare alias (only when nothing else could follow: `expr alias,` / `expr alias FROM`)
        advance();
      } else if (cur().kind == TokenKind::Ident && !is_reserved(cur()) &&
                 (peek().value == "," || peek().value == ";")) {
        advance();
      }
    } while (accept_punct(","));
  }

  void parse_from() {
    parse_table_ref();
    for (;;) {
      if (accept_punct(",")) {
        parse_table_ref();
        continue;
      }
      if (cur().is_keyword("LEFT") || cur().is_keyword("RIGHT") || cur().is_keyword("FULL")) {
        throw SqlError("outer joins are not supported (found '" + cur().value + "')");
      }
      if (cur().is_keyword("NATURAL")) throw SqlError("NATURAL joins are not supported");
      bool has_join = false;
      bool wants_on = true;
      if (accept_kw("INNER")) {
        expect_kw("JOIN");
        has_join = true;
      } else if (accept_kw("CROSS")) {
        expect_kw("JOIN");
        has_join = true;
        wants_on = false;
      } else if (accept_kw("JOIN")) {
        has_join = true;
      }
      if (!has_join) break;
      parse_table_ref();
      if (cur().is_keyword("USING")) fail("JOIN ... USING is not supported; use ON");
      if (wants_on) {
        if (accept_kw("ON")) {
          resolve_ = true;
          CondNode cond = parse_or();
          resolve_ = false;
          add_conjuncts(cond);
        } else {
          fail("expected ON after JOIN");
        }
      }
    }
  }

  void parse_table_ref() {
    if (cur().kind == TokenKind::Punct && cur().value == "(") {
      throw SqlError("subqueries in FROM are not supported");
    }
    if (cur().kind != TokenKind::Ident || (is_reserved(cur()) && !cur().quoted_ident)) {
      fail("expected table name");
    }
    RelationRef rel;
    rel.name = cur().value;
    rel.name_token = pos_;
    advance();
    if (accept_punct(".")) fail("qualified table names are not supported");
    if (accept_kw("AS")) {
      if (cur().kind != TokenKind::Ident) fail("expected alias after AS");
      rel.alias = cur().value;
      advance();
    } else if (cur().kind == TokenKind::Ident && !is_reserved(cur())) {
      rel.alias = cur().value;
      advance();
    }

    if (const VirtualTableSpec* spec = catalog_.find_spec(rel.name)) {
      rel.kind = RelationKind::Virtual;
      rel.spec = spec;
    } else if (db_.find_table(rel.name)) {
      rel.kind = RelationKind::Base;
    } else {
      throw SqlError("unresolvable relation '" + rel.name +
                     "': not a table in database '" + db_.id +
                     "' and not a declared virtual table");
    }
    for (const auto& existing : ast_.relations) {
      if (ci_equal(existing.effective_name(), rel.effective_name())) {
        throw SqlError("duplicate relation name '" + rel.effective_name() +
                       "' in FROM; add an alias");
      }
    }
    ast_.relations.push_back(std::move(rel));
  }

  void parse_order_items() {
    do {
      parse_or();
      if (accept_kw("ASC") || accept_kw("DESC")) {
      }
    } while (accept_punct(","));
  }

  void parse_expr_list_unresolved() {
    do {
      parse_or();
    } while (accept_punct(","));
  }

  void parse_limit() {
    bool neg = false;
    if (accept_punct("-")) neg = true;
    if (cur().kind != TokenKind::Number) fail("LIMIT expects an integer literal");
    const std::string& text = cur().value;
    if (text.find('.') != std::string::npos || text.find('e') != std::string::npos ||
        text.find('E') != std::string::npos) {
      fail("LIMIT expects an integer literal");
    }
    std::int64_t v = std::stoll(text);
    ast_.limit = neg ? -v : v;
    advance();
    if (accept_kw("OFFSET")) {
      accept_punct("-");
      if (cur().kind != TokenKind::Number) fail("OFFSET expects an integer literal");
      advance();
    }
  }

  // ---- conditions ----

  CondNode parse_or() {
    size_t b = pos_;
    CondNode first = parse_and();
    if (!cur().is_keyword("OR")) return first;
    CondNode node;
    node.kind = CondNode::Kind::Or;
    node.begin_tok = b;
    node.children.push_back(std::move(first));
    while (accept_kw("OR")) node.children.push_back(parse_and());
    node.end_tok = pos_;
    for (const auto& c : node.children) {
      node.rels.insert(c.rels.begin(), c.rels.end());
      node.deterministic = node.deterministic && c.deterministic;
    }
    return node;
  }

  CondNode parse_and() {
    size_t b = pos_;
    CondNode first = parse_not();
    if (!cur().is_keyword("AND")) return first;
    CondNode node;
    node.kind = CondNode::Kind::And;
    node.begin_tok = b;
    node.children.push_back(std::move(first));
    while (accept_kw("AND")) node.children.push_back(parse_not());
    node.end_tok = pos_;
    for (const auto& c : node.children) {
      node.rels.insert(c.rels.begin(), c.rels.end());
      node.deterministic = node.deterministic && c.deterministic;
    }
    return node;
  }

  CondNode parse_not() {
    if (cur().is_keyword("NOT")) {
      size_t b = pos_;
      advance();
      CondNode inner = parse_not();
      CondNode node;
      node.kind = CondNode::Kind::Leaf;
      node.begin_tok = b;
      node.end_tok = pos_;
      node.rels = std::move(inner.rels);
      node.deterministic = inner.deterministic;
      return node;
    }
    return parse_predicate();
  }

  CondNode parse_predicate() {
    size_t b = pos_;
    CondNode node;
    node.kind = CondNode::Kind::Leaf;
    node.begin_tok = b;

    OperandInfo lhs = parse_additive();
    node.rels = lhs.rels;
    node.deterministic = lhs.deterministic;

    auto absorb = [&](const OperandInfo& o) {
      node.rels.insert(o.rels.begin(), o.rels.end());
      node.deterministic = node.deterministic && o.deterministic;
    };

    if (cur().kind == TokenKind::Punct) {
      const std::string& op = cur().value;
      if (op == "=" || op == "==" || op == "!=" || op == "<>" || op == "<" || op == "<=" ||
          op == ">" || op == ">=") {
        advance();
        OperandInfo rhs = parse_additive();
        absorb(rhs);
        if ((op == "=" || op == "==") && lhs.col && rhs.col &&
            lhs.col->relation != rhs.col->relation && lhs.col->relation >= 0 &&
            rhs.col->relation >= 0) {
          node.is_join_equality = true;
          node.lhs = *lhs.col;
          node.rhs = *rhs.col;
        }
        node.end_tok = pos_;
        return node;
      }
    }
    bool negated = false;
    if (cur().is_keyword("NOT")) {
      // NOT LIKE / NOT IN / NOT BETWEEN
      negated = true;
      advance();
    }
    if (accept_kw("IS")) {
      if (negated) fail("unexpected NOT before IS");
      accept_kw("NOT");
      expect_kw("NULL");
      node.end_tok = pos_;
      return node;
    }
    if (accept_kw("LIKE") || accept_kw("GLOB")) {
      OperandInfo pattern = parse_additive();
      absorb(pattern);
      if (accept_kw("ESCAPE")) {
        OperandInfo esc = parse_additive();
        absorb(esc);
      }
      node.end_tok = pos_;
      return node;
    }
    if (accept_kw("IN")) {
      expect_punct("(");
      if (cur().is_keyword("SELECT")) throw SqlError("subqueries are not supported");
      do {
        OperandInfo item = parse_additive();
        absorb(item);
      } while (accept_punct(","));
      expect_punct(")");
      node.end_tok = pos_;
      return node;
    }
    if (accept_kw("BETWEEN")) {
      OperandInfo lo = parse_additive();
      absorb(lo);
      expect_kw("AND");
      OperandInfo hi = parse_additive();
      absorb(hi);
      node.end_tok = pos_;
      return node;
    }
    if (negated) fail("expected LIKE, IN, or BETWEEN after NOT");
    // Bare operand (boolean column or parenthesized condition).
    node.end_tok = pos_;
    return node;
  }

  // ---- operands ----

  OperandInfo parse_additive() {
    OperandInfo left = parse_multiplicative();
    while (cur().kind == TokenKind::Punct &&
           (cur().value == "+" || cur().value == "-" || cur().value == "||")) {
      advance();
      OperandInfo right = parse_multiplicative();
      left.rels.insert(right.rels.begin(), right.rels.end());
      left.deterministic = left.deterministic && right.deterministic;
      left.col.reset();
    }
    return left;
  }

  OperandInfo parse_multiplicative() {
    OperandInfo left = parse_unary();
    while (cur().kind == TokenKind::Punct &&
           (cur().value == "*" || cur().value == "/" || cur().value == "%")) {
      advance();
      OperandInfo right = parse_unary();
      left.rels.insert(right.rels.begin(), right.rels.end());
      left.deterministic = left.deterministic && right.deterministic;
      left.col.reset();
    }
    return left;
  }

  OperandInfo parse_unary() {
    if (cur().kind == TokenKind::Punct && (cur().value == "-" || cur().value == "+")) {
      advance();
      OperandInfo inner = parse_unary();
      inner.col.reset();
      return inner;
    }
    return parse_primary();
  }

  OperandInfo parse_primary() {
    OperandInfo info;
    if (cur().kind == TokenKind::Number || cur().kind == TokenKind::String) {
      advance();
      return info;
    }
    if (cur().is_keyword("NULL")) {
      advance();
      return info;
    }
    if (cur().is_keyword("CASE")) throw SqlError("CASE expressions are not supported");
    if (cur().is_keyword("EXISTS")) throw SqlError("subqueries are not supported");
    if (cur().kind == TokenKind::Punct && cur().value == "(") {
      advance();
      if (cur().is_keyword("SELECT")) throw SqlError("subqueries are not supported");
      CondNode inner = parse_or();
      expect_punct(")");
      info.rels = std::move(inner.rels);
      info.deterministic = inner.deterministic;
      return info;
    }
    if (cur().kind == TokenKind::Punct && cur().value == "?") {
      fail("bound parameters are not supported");
    }
    if (cur().kind != TokenKind::Ident) fail("expected an expression");

    // function call
    if (!cur().quoted_ident && peek().kind == TokenKind::Punct && peek().value == "(") {
      std::string fname = cur().value;
      advance();
      advance(); // '('
      info.deterministic = !is_nondeterministic_fn(fname);
      if (accept_punct("*")) {
        expect_punct(")");
        return info;
      }
      if (accept_punct(")")) return info;
      accept_kw("DISTINCT");
      do {
        OperandInfo arg = parse_additive();
        info.rels.insert(arg.rels.begin(), arg.rels.end());
        info.deterministic = info.deterministic && arg.deterministic;
      } while (accept_punct(","));
      expect_punct(")");
      return info;
    }

    // column reference: col | rel.col | rel.*
    if (is_reserved(cur())) fail("unexpected keyword '" + cur().value + "'");
    std::string first = cur().value;
    advance();
    if (accept_punct(".")) {
      std::string column;
      bool star = false;
      if (accept_punct("*")) {
        star = true;
      } else {
        if (cur().kind != TokenKind::Ident) fail("expected column name after '.'");
        column = cur().value;
        advance();
        if (cur().kind == TokenKind::Punct && cur().value == ".") {
          fail("three-part names are not supported");
        }
      }
      if (resolve_) {
        int rel = resolve_relation(first);
        if (!star) check_column(rel, column);
        info.rels.insert(rel);
        if (!star) info.col = ColumnRef{rel, column};
      }
      return info;
    }
    if (resolve_) {
      int rel = resolve_unqualified(first);
      info.rels.insert(rel);
      info.col = ColumnRef{rel, first};
    }
    return info;
  }

  int resolve_relation(const std::string& name) const {
    for (size_t i = 0; i < ast_.relations.size(); ++i) {
      if (ci_equal(ast_.relations[i].effective_name(), name)) return static_cast<int>(i);
    }
    throw SqlError("unknown relation '" + name + "' referenced in condition");
  }

  void check_column(int rel, const std::string& column) const {
    const RelationRef& r = ast_.relations[static_cast<size_t>(rel)];
    if (r.kind == RelationKind::Virtual) {
      if (!r.spec->has_column(column)) {
        throw SqlError("virtual table '" + r.name + "' has no column '" + column + "'");
      }
    } else {
      const TableSchema* t = db_.find_table(r.name);
      if (t && !t->has_column(column)) {
        throw SqlError("table '" + r.name + "' has no column '" + column + "'");
      }
    }
  }

  int resolve_unqualified(const std::string& column) const {
    std::vector<int> hits;
    for (size_t i = 0; i < ast_.relations.size(); ++i) {
      const RelationRef& r = ast_.relations[i];
      bool has = false;
      if (r.kind == RelationKind::Virtual) {
        has = r.spec->has_column(column);
      } else if (const TableSchema* t = db_.find_table(r.name)) {
        has = t->has_column(column);
      }
      if (has) hits.push_back(static_cast<int>(i));
    }
    if (hits.empty()) throw SqlError("unknown column '" + column + "'");
    if (hits.size() > 1) throw SqlError("ambiguous column '" + column + "'");
    return hits[0];
  }

  // ---- conjunct collection ----

  void add_conjuncts(const CondNode& node) {
    if (node.kind == CondNode::Kind::And) {
      for (const auto& c : node.children) add_conjuncts(c);
      return;
    }
    Predicate p;
    p.begin = ast_.tokens[node.begin_tok].begin;
    p.end = ast_.tokens[node.end_tok - 1].end;
    p.text = ast_.original_sql.substr(p.begin, p.end - p.begin);
    p.relations = node.rels;
    p.deterministic = node.deterministic;
    p.is_join_equality = node.is_join_equality;
    p.lhs = node.lhs;
    p.rhs = node.rhs;
    if (p.is_join_equality) {
      ast_.join_conditions.push_back(std::move(p));
    } else {
      ast_.filters.push_back(std::move(p));
    }
  }

  void collect_qualifier_tokens() {
    for (size_t i = 0; i + 1 < ast_.tokens.size(); ++i) {
      if (ast_.tokens[i].kind == TokenKind::Ident && ast_.tokens[i + 1].kind == TokenKind::Punct &&
          ast_.tokens[i + 1].value == ".") {
        ast_.qualifier_tokens.push_back(i);
      }
    }
  }
};

} // namespace

size_t HybridQueryAst::virtual_count() const {
  size_t n = 0;
  for (const auto& r : relations) {
    if (r.kind == RelationKind::Virtual) ++n;
  }
  return n;
}

std::vector<const RelationRef*> HybridQueryAst::virtual_relations() const {
  std::vector<const RelationRef*> out;
  for (const auto& r : relations) {
    if (r.kind == RelationKind::Virtual) out.push_back(&r);
  }
  return out;
}

HybridQueryAst parse_hybrid(std::string_view sql, const Catalog& catalog,
                            const DatabaseHandle& db) {
  Parser parser(sql, catalog, db);
  return parser.parse();
}

std::string rewrite_to_cache(const HybridQueryAst& ast, const CacheNaming& naming) {
  struct Splice {
    size_t begin;
    size_t end;
    std::string replacement;
  };
  std::vector<Splice> splices;

  for (const auto& rel : ast.relations) {
    if (rel.kind != RelationKind::Virtual) continue;
    const Token& t = ast.tokens[rel.name_token];
    splices.push_back({t.begin, t.end, naming.name(rel.spec->name)});
  }
  // Unaliased virtual relations are also referenced through qualifiers
  // (`llm.publisher`); aliased ones keep their alias.
  for (size_t idx : ast.qualifier_tokens) {
    const Token& t = ast.tokens[idx];
    for (const auto& rel : ast.relations) {
      if (rel.kind != RelationKind::Virtual || !rel.alias.empty()) continue;
      if (rel.name_token == idx) continue;
      if (ci_equal(rel.name, t.value)) {
        splices.push_back({t.begin, t.end, naming.name(rel.spec->name)});
        break;
      }
    }
  }
  if (splices.empty()) return ast.original_sql;

  std::sort(splices.begin(), splices.end(),
            [](const Splice& a, const Splice& b) { return a.begin < b.begin; });
  std::string out;
  size_t cursor = 0;
  for (const auto& s : splices) {
    out += ast.original_sql.substr(cursor, s.begin - cursor);
    out += s.replacement;
    cursor = s.end;
  }
  out += ast.original_sql.substr(cursor);
  return out;
}

std::vector<Predicate> extract_pushdown_predicates(const HybridQueryAst& ast,
                                                   const VirtualTableSpec& spec) {
  int virt = -1, base = -1;
  for (size_t i = 0; i < ast.relations.size(); ++i) {
    const RelationRef& r = ast.relations[i];
    if (r.kind == RelationKind::Virtual && ci_equal(r.name, spec.name)) {
      if (virt >= 0) return {}; // self-join on the virtual table: ambiguous
      virt = static_cast<int>(i);
    }
    if (r.kind == RelationKind::Base && ci_equal(r.name, spec.base_table)) {
      if (base >= 0) return {};
      base = static_cast<int>(i);
    }
  }
  if (virt < 0 || base < 0) return {};

  // Key restriction is sound only when the query equi-joins the virtual
  // relation to its base table on every key attribute.
  for (const auto& key : spec.key_attrs) {
    bool joined = false;
    for (const auto& jc : ast.join_conditions) {
      if (!jc.is_join_equality) continue;
      bool forward = jc.lhs.relation == virt && jc.rhs.relation == base &&
                     ci_equal(jc.lhs.column, key.name) && ci_equal(jc.rhs.column, key.name);
      bool backward = jc.lhs.relation == base && jc.rhs.relation == virt &&
                      ci_equal(jc.lhs.column, key.name) && ci_equal(jc.rhs.column, key.name);
      if (forward || backward) {
        joined = true;
        break;
      }
    }
    if (!joined) return {};
  }

  std::vector<Predicate> out;
  for (const auto& f : ast.filters) {
    if (!f.deterministic) continue;
    bool base_only = true;
    for (int r : f.relations) {
      if (r != base) {
        base_only = false;
        break;
      }
    }
    if (base_only) out.push_back(f);
  }
  return out;
}

} // namespace hyq::sql
