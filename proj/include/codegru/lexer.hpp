#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "codegru/errors.hpp"

namespace codegru {

enum class TokenKind {
  keyword,
  identifier,
  int_lit,
  long_lit,
  float_lit,
  double_lit,
  char_lit,
  string_lit,
  bool_lit,
  null_lit,
  op,
  separator,
};

inline std::string_view to_string(TokenKind k) {
  switch (k) {
    case TokenKind::keyword: return "keyword";
    case TokenKind::identifier: return "identifier";
    case TokenKind::int_lit: return "int_lit";
    case TokenKind::long_lit: return "long_lit";
    case TokenKind::float_lit: return "float_lit";
    case TokenKind::double_lit: return "double_lit";
    case TokenKind::char_lit: return "char_lit";
    case TokenKind::string_lit: return "string_lit";
    case TokenKind::bool_lit: return "bool_lit";
    case TokenKind::null_lit: return "null_lit";
    case TokenKind::op: return "operator";
    case TokenKind::separator: return "separator";
  }
  return "?";
}

struct Token {
  std::string text;
  TokenKind kind = TokenKind::identifier;
  std::size_t line = 1;  // 1-based
  std::size_t col = 1;   // 1-based, in bytes
  std::size_t offset = 0;

  bool is(TokenKind k, std::string_view t) const { return kind == k && text == t; }
  bool is_sep(std::string_view t) const { return kind == TokenKind::separator && text == t; }
  bool is_op(std::string_view t) const { return kind == TokenKind::op && text == t; }
  bool is_literal() const {
    return kind >= TokenKind::int_lit && kind <= TokenKind::null_lit;
  }

  friend bool operator==(const Token&, const Token&) = default;
};

// Java reserved words. `true`, `false` and `null` are literals, and the
// contextual words (var, record, yield, ...) lex as identifiers.
inline constexpr auto java_keywords = std::to_array<std::string_view>({
    "abstract", "assert",     "boolean",   "break",     "byte",         "case",      "catch",
    "char",     "class",      "const",     "continue",  "default",      "do",        "double",
    "else",     "enum",       "extends",   "final",     "finally",      "float",     "for",
    "goto",     "if",         "implements", "import",   "instanceof",   "int",       "interface",
    "long",     "native",     "new",       "package",   "private",      "protected", "public",
    "return",   "short",      "static",    "strictfp",  "super",        "switch",    "synchronized",
    "this",     "throw",      "throws",    "transient", "try",          "void",      "volatile",
    "while"});

inline bool is_keyword(std::string_view s) {
  return std::find(java_keywords.begin(), java_keywords.end(), s) != java_keywords.end();
}

// Longest first so a linear scan is maximal munch.
inline constexpr auto java_operators = std::to_array<std::string_view>({
    ">>>=", "<<=", ">>=", ">>>", "...", "->", "::", "++", "--", "&&", "||", "==", "!=", "<=",
    ">=",   "+=",  "-=",  "*=",  "/=",  "%=", "&=", "|=", "^=", "<<", ">>", "=",  "+",  "-",
    "*",    "/",   "%",   "<",   ">",   "!",  "~",  "?",  ":",  "&",  "|",  "^"});

inline constexpr std::string_view java_separators = "(){}[];,.@";

struct LexDiagnostic {
  std::size_t line;
  std::size_t col;
  std::string message;
};

struct LexResult {
  std::vector<Token> tokens;
  std::vector<LexDiagnostic> errors;
  bool ok() const { return errors.empty(); }
};

namespace detail {

class Lexer {
 public:
  explicit Lexer(std::string_view text) : src_(text) {}

  LexResult run() {
    LexResult out;
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v') {
        advance(1);
      } else if (c == '\n') {
        advance(1);
      } else if (ident_start(c)) {
        lex_identifier(out);
      } else if (digit(c) || (c == '.' && pos_ + 1 < src_.size() && digit(src_[pos_ + 1]))) {
        lex_number(out);
      } else if (c == '"') {
        lex_quoted(out, '"', TokenKind::string_lit, "unterminated string literal");
      } else if (c == '\'') {
        lex_quoted(out, '\'', TokenKind::char_lit, "unterminated char literal");
      } else if (!lex_operator(out)) {
        if (java_separators.find(c) != std::string_view::npos) {
          emit(out, TokenKind::separator, 1);
        } else {
          out.errors.push_back({line_, col_, std::string("unknown character '") + c + "'"});
          advance(1);
        }
      }
    }
    return out;
  }

 private:
  static bool digit(char c) { return c >= '0' && c <= '9'; }
  static bool ident_start(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' || c == '$' ||
           static_cast<unsigned char>(c) >= 0x80;
  }
  static bool ident_part(char c) { return ident_start(c) || digit(c); }

  void advance(std::size_t n) {
    for (std::size_t i = 0; i < n && pos_ < src_.size(); ++i) {
      if (src_[pos_] == '\n') {
        ++line_;
        col_ = 1;
      } else {
        ++col_;
      }
      ++pos_;
    }
  }

  void emit(LexResult& out, TokenKind kind, std::size_t len) {
    out.tokens.push_back({std::string(src_.substr(pos_, len)), kind, line_, col_, pos_});
    advance(len);
  }

  void lex_identifier(LexResult& out) {
    std::size_t end = pos_ + 1;
    while (end < src_.size() && ident_part(src_[end])) ++end;
    const auto word = src_.substr(pos_, end - pos_);
    TokenKind kind = TokenKind::identifier;
    if (word == "true" || word == "false")
      kind = TokenKind::bool_lit;
    else if (word == "null")
      kind = TokenKind::null_lit;
    else if (is_keyword(word))
      kind = TokenKind::keyword;
    emit(out, kind, end - pos_);
  }

  void lex_number(LexResult& out) {
    std::size_t end = pos_;
    auto digits = [&](auto pred) {
      while (end < src_.size() && (pred(src_[end]) || src_[end] == '_')) ++end;
    };
    auto is_hex = [](char c) { return digit(c) || (c >= 'a' && c <= 'f') || (c >= 'A' && c <= 'F'); };
    auto is_bin = [](char c) { return c == '0' || c == '1'; };
    bool fractional = false;
    if (src_[end] == '0' && end + 1 < src_.size() && (src_[end + 1] == 'x' || src_[end + 1] == 'X')) {
      end += 2;
      digits(is_hex);
    } else if (src_[end] == '0' && end + 1 < src_.size() && (src_[end + 1] == 'b' || src_[end + 1] == 'B')) {
      end += 2;
      digits(is_bin);
    } else {
      digits(digit);
      if (end < src_.size() && src_[end] == '.' && !(end + 1 < src_.size() && src_[end + 1] == '.')) {
        fractional = true;
        ++end;
        digits(digit);
      }
      if (end < src_.size() && (src_[end] == 'e' || src_[end] == 'E')) {
        std::size_t e = end + 1;
        if (e < src_.size() && (src_[e] == '+' || src_[e] == '-')) ++e;
        if (e < src_.size() && digit(src_[e])) {
          fractional = true;
          end = e;
          digits(digit);
        }
      }
    }
    TokenKind kind = fractional ? TokenKind::float_lit : TokenKind::int_lit;
    if (end < src_.size()) {
      const char s = src_[end];
      if ((s == 'l' || s == 'L') && !fractional) {
        kind = TokenKind::long_lit;
        ++end;
      } else if (s == 'f' || s == 'F') {
        kind = TokenKind::float_lit;
        ++end;
      } else if (s == 'd' || s == 'D') {
        kind = TokenKind::double_lit;
        ++end;
      }
    }
    emit(out, kind, end - pos_);
  }

  void lex_quoted(LexResult& out, char quote, TokenKind kind, const char* unterminated) {
    std::size_t end = pos_ + 1;
    while (end < src_.size() && src_[end] != quote && src_[end] != '\n') {
      end += (src_[end] == '\\' && end + 1 < src_.size() && src_[end + 1] != '\n') ? 2 : 1;
    }
    if (end >= src_.size() || src_[end] != quote) {
      out.errors.push_back({line_, col_, unterminated});
      advance(end - pos_);
      return;
    }
    emit(out, kind, end + 1 - pos_);
  }

  bool lex_operator(LexResult& out) {
    for (auto op : java_operators) {
      if (src_.substr(pos_, op.size()) == op) {
        emit(out, TokenKind::op, op.size());
        return true;
      }
    }
    return false;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t col_ = 1;
};

}  // namespace detail

// Tokenizes and records every lexical error instead of stopping.
inline LexResult lex_collect(std::string_view text) { return detail::Lexer(text).run(); }

// Maximal-munch tokenization of comment-free Java-subset source.
inline std::vector<Token> lex(std::string_view text) {
  auto result = lex_collect(text);
  if (!result.ok()) {
    const auto& e = result.errors.front();
    throw LexError(e.message, e.line, e.col);
  }
  return std::move(result.tokens);
}

}  // namespace codegru
