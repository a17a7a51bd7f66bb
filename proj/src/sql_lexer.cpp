#include "hyq/sql_frontend.hpp"

#include "hyq/error.hpp"
#include "hyq/text.hpp"

namespace hyq::sql {

bool Token::is_keyword(std::string_view kw) const {
  return kind == TokenKind::Ident && !quoted_ident && ci_equal(value, kw);
}

namespace {

bool ident_head(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
}
bool ident_tail(char c) {
  return ident_head(c) || (c >= '0' && c <= '9') || c == '$';
}
bool digit(char c) { return c >= '0' && c <= '9'; }

std::vector<Token> lex_impl(std::string_view sql, bool lenient) {
  std::vector<Token> out;
  size_t i = 0;
  const size_t n = sql.size();
  auto push = [&](TokenKind kind, size_t begin, size_t end, std::string value,
                  bool quoted = false) {
    Token t;
    t.kind = kind;
    t.begin = begin;
    t.end = end;
    t.text = std::string(sql.substr(begin, end - begin));
    t.value = std::move(value);
    t.quoted_ident = quoted;
    out.push_back(std::move(t));
  };

  while (i < n) {
    char c = sql[i];
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v') {
      ++i;
      continue;
    }
    // comments
    if (c == '-' && i + 1 < n && sql[i + 1] == '-') {
      while (i < n && sql[i] != '\n') ++i;
      continue;
    }
    if (c == '/' && i + 1 < n && sql[i + 1] == '*') {
      size_t start = i;
      i += 2;
      while (i + 1 < n && !(sql[i] == '*' && sql[i + 1] == '/')) ++i;
      if (i + 1 >= n) {
        if (!lenient) throw SqlError("unterminated block comment at offset " + std::to_string(start));
        i = n;
      } else {
        i += 2;
      }
      continue;
    }
    // string literal
    if (c == '\'') {
      size_t start = i;
      ++i;
      std::string value;
      bool closed = false;
      while (i < n) {
        if (sql[i] == '\'') {
          if (i + 1 < n && sql[i + 1] == '\'') {
            value += '\'';
            i += 2;
            continue;
          }
          ++i;
          closed = true;
          break;
        }
        value += sql[i++];
      }
      if (!closed && !lenient) {
        throw SqlError("unterminated string literal at offset " + std::to_string(start));
      }
      push(TokenKind::String, start, i, std::move(value));
      continue;
    }
    // quoted identifiers: "..."  `...`  [...]
    if (c == '"' || c == '`' || c == '[') {
      char closer = c == '[' ? ']' : c;
      size_t start = i;
      ++i;
      std::string value;
      bool closed = false;
      while (i < n) {
        if (sql[i] == closer) {
          if (closer != ']' && i + 1 < n && sql[i + 1] == closer) {
            value += closer;
            i += 2;
            continue;
          }
          ++i;
          closed = true;
          break;
        }
        value += sql[i++];
      }
      if (!closed && !lenient) {
        throw SqlError("unterminated quoted identifier at offset " + std::to_string(start));
      }
      push(TokenKind::Ident, start, i, std::move(value), /*quoted=*/true);
      continue;
    }
    // numbers (including leading-dot decimals)
    if (digit(c) || (c == '.' && i + 1 < n && digit(sql[i + 1]))) {
      size_t start = i;
      if (c == '0' && i + 1 < n && (sql[i + 1] == 'x' || sql[i + 1] == 'X')) {
        i += 2;
        while (i < n && (digit(sql[i]) || (sql[i] >= 'a' && sql[i] <= 'f') ||
                         (sql[i] >= 'A' && sql[i] <= 'F')))
          ++i;
      } else {
        while (i < n && digit(sql[i])) ++i;
        if (i < n && sql[i] == '.') {
          ++i;
          while (i < n && digit(sql[i])) ++i;
        }
        if (i < n && (sql[i] == 'e' || sql[i] == 'E')) {
          size_t save = i;
          ++i;
          if (i < n && (sql[i] == '+' || sql[i] == '-')) ++i;
          if (i < n && digit(sql[i])) {
            while (i < n && digit(sql[i])) ++i;
          } else {
            i = save;
          }
        }
      }
      push(TokenKind::Number, start, i, std::string(sql.substr(start, i - start)));
      continue;
    }
    // identifiers / keywords
    if (ident_head(c)) {
      size_t start = i;
      while (i < n && ident_tail(sql[i])) ++i;
      push(TokenKind::Ident, start, i, std::string(sql.substr(start, i - start)));
      continue;
    }
    // operators and punctuation, longest match first
    static const char* three[] = {"->>"};
    static const char* two[] = {"==", "!=", "<>", "<=", ">=", "||", "<<", ">>", "->"};
    bool matched = false;
    for (const char* op : three) {
      if (sql.substr(i, 3) == op) {
        push(TokenKind::Punct, i, i + 3, op);
        i += 3;
        matched = true;
        break;
      }
    }
    if (matched) continue;
    for (const char* op : two) {
      if (sql.substr(i, 2) == op) {
        push(TokenKind::Punct, i, i + 2, op);
        i += 2;
        matched = true;
        break;
      }
    }
    if (matched) continue;
    push(TokenKind::Punct, i, i + 1, std::string(1, c));
    ++i;
  }
  push(TokenKind::End, n, n, "");
  return out;
}

} // namespace

std::vector<Token> lex(std::string_view sql) { return lex_impl(sql, /*lenient=*/false); }

bool has_top_level_order_by(std::string_view sql) {
  std::vector<Token> toks = lex_impl(sql, /*lenient=*/true);
  int depth = 0;
  for (size_t i = 0; i + 1 < toks.size(); ++i) {
    const Token& t = toks[i];
    if (t.kind == TokenKind::Punct) {
      if (t.value == "(") ++depth;
      else if (t.value == ")") --depth;
      continue;
    }
    if (depth == 0 && t.is_keyword("ORDER") && toks[i + 1].is_keyword("BY")) return true;
  }
  return false;
}

} // namespace hyq::sql
