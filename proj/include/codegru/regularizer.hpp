#pragma once

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "codegru/lexer.hpp"

namespace codegru {

inline std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

// Lexically scoped identifier -> normalized type name map.
class ScopeTable {
 public:
  ScopeTable() : scopes_(1) {}

  void push() { scopes_.emplace_back(); }

  // The outermost (file) scope is never popped; a stray `}` is ignored.
  void pop() {
    if (scopes_.size() > 1) scopes_.pop_back();
  }

  void declare(const std::string& name, std::string type) { scopes_.back()[name] = std::move(type); }

  void declare_in(std::unordered_map<std::string, std::string> entries) {
    for (auto& [k, v] : entries) scopes_.back()[k] = std::move(v);
  }

  std::optional<std::string> lookup(const std::string& name) const {
    for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
      if (auto f = it->find(name); f != it->end()) return f->second;
    }
    return std::nullopt;
  }

  std::size_t depth() const { return scopes_.size(); }

 private:
  std::vector<std::unordered_map<std::string, std::string>> scopes_;
};

struct AnnotatedToken {
  Token token;
  std::optional<std::string> type;  // resolved normalized type of an identifier
};

struct RegularizedToken {
  std::string text;
  TokenKind source_kind = TokenKind::identifier;
  bool encoded = false;

  friend bool operator==(const RegularizedToken&, const RegularizedToken&) = default;
};

namespace detail {

inline bool is_primitive(const Token& t) {
  static constexpr std::string_view prims[] = {"int", "long", "short", "byte", "char", "float", "double", "boolean"};
  return t.kind == TokenKind::keyword && std::find(std::begin(prims), std::end(prims), t.text) != std::end(prims);
}

inline bool is_modifier(const Token& t) {
  static constexpr std::string_view mods[] = {"public",    "private",  "protected",    "static",
                                              "final",     "abstract", "transient",    "volatile",
                                              "synchronized", "native", "strictfp"};
  return t.kind == TokenKind::keyword && std::find(std::begin(mods), std::end(mods), t.text) != std::end(mods);
}

inline bool is_name(const Token& t) { return t.kind == TokenKind::identifier && t.text != "var"; }

struct ParsedType {
  std::size_t next;      // index after the type
  std::string name;      // normalized: type arguments, then base, then "array" per dimension
  int extra_closers = 0; // `>` characters of a `>>`/`>>>` token owed to enclosing lists
};

class TypeParser {
 public:
  explicit TypeParser(const std::vector<Token>& toks) : toks_(toks) {}

  std::optional<ParsedType> parse(std::size_t pos, int nesting = 0) const {
    if (pos >= toks_.size()) return std::nullopt;
    if (nesting > 4) return std::nullopt;
    const auto& first = toks_[pos];
    if (!is_name(first) && !is_primitive(first)) return std::nullopt;

    std::string base = first.text;
    std::size_t i = pos + 1;
    if (!is_primitive(first)) {
      while (i + 1 < toks_.size() && toks_[i].is_sep(".") && is_name(toks_[i + 1])) {
        base = toks_[i + 1].text;
        i += 2;
      }
    }

    std::string args;
    int owed = 0;
    if (i < toks_.size() && toks_[i].is_op("<")) {
      ++i;
      if (i < toks_.size() && toks_[i].is_op(">")) {
        ++i;  // diamond
      } else {
        for (;;) {
          std::optional<ParsedType> arg;
          if (i < toks_.size() && toks_[i].is_op("?")) {
            // wildcard: `?`, `? extends T`, `? super T`
            std::size_t j = i + 1;
            if (j < toks_.size() && (toks_[j].is(TokenKind::keyword, "extends") || toks_[j].is(TokenKind::keyword, "super"))) {
              arg = parse(j + 1, nesting + 1);
            } else {
              arg = ParsedType{j, "", 0};
            }
          } else {
            arg = parse(i, nesting + 1);
          }
          if (!arg) return std::nullopt;
          args += arg->name;
          i = arg->next;
          if (arg->extra_closers > 0) {
            owed = arg->extra_closers - 1;
            break;
          }
          if (i >= toks_.size()) return std::nullopt;
          const auto& t = toks_[i];
          if (t.is_sep(",")) {
            ++i;
            continue;
          }
          if (t.is_op(">")) {
            ++i;
            owed = 0;
          } else if (t.is_op(">>")) {
            ++i;
            owed = 1;
          } else if (t.is_op(">>>")) {
            ++i;
            owed = 2;
          } else {
            return std::nullopt;
          }
          break;
        }
      }
    }
    if (owed > 0) return ParsedType{i, args + to_lower(base), owed};

    std::string dims;
    while (i + 1 < toks_.size() && toks_[i].is_sep("[") && toks_[i + 1].is_sep("]")) {
      dims += "array";
      i += 2;
    }
    if (i < toks_.size() && toks_[i].is_op("...")) {
      dims += "array";
      ++i;
    }
    return ParsedType{i, args + to_lower(base) + dims, 0};
  }

 private:
  const std::vector<Token>& toks_;
};

inline bool declaration_context(const std::vector<Token>& toks, std::size_t i) {
  if (i == 0) return true;
  const auto& p = toks[i - 1];
  if (p.is_sep("{") || p.is_sep("}") || p.is_sep(";") || p.is_sep("(") || p.is_sep(",")) return true;
  if (is_modifier(p)) return true;
  // annotation directly before the type: `@Nullable String s`
  if (p.kind == TokenKind::identifier && i >= 2 && toks[i - 2].is_sep("@")) return true;
  return false;
}

inline bool ends_declarator(const Token& t) {
  return t.is_op("=") || t.is_sep(";") || t.is_sep(",") || t.is_sep(")") || t.is_op(":") || t.is_sep("[");
}

}  // namespace detail

// Finds variable/object declarations and annotates every later use of the
// declared identifier with its normalized type, honouring block scopes.
// Declarations made inside parentheses (parameters, for headers, catch
// clauses, resources) are held pending and become part of the next block.
inline std::vector<AnnotatedToken> resolve_types(const std::vector<Token>& toks) {
  const detail::TypeParser types(toks);
  std::map<std::size_t, std::string> decl_at;

  for (std::size_t i = 0; i < toks.size(); ++i) {
    if (!detail::declaration_context(toks, i)) continue;
    auto ty = types.parse(i);
    if (!ty || ty->extra_closers != 0 || ty->next >= toks.size()) continue;
    // multi-catch: `catch (A | B e)` takes the first alternative
    std::size_t k = ty->next;
    if (i >= 2 && toks[i - 1].is_sep("(") && toks[i - 2].is(TokenKind::keyword, "catch")) {
      while (k + 1 < toks.size() && toks[k].is_op("|")) {
        auto alt = types.parse(k + 1);
        if (!alt) break;
        k = alt->next;
      }
    }
    if (k >= toks.size() || !detail::is_name(toks[k])) continue;
    if (k + 1 < toks.size() && !detail::ends_declarator(toks[k + 1])) continue;

    std::string type = ty->name;
    std::size_t id = k;
    std::size_t j = id + 1;
    std::string declared = type;
    while (j + 1 < toks.size() && toks[j].is_sep("[") && toks[j + 1].is_sep("]")) {
      declared += "array";
      j += 2;
    }
    decl_at[id] = declared;

    // further declarators: `int a = 1, b, c = f(x);`
    for (;;) {
      if (j < toks.size() && toks[j].is_op("=")) {
        int depth = 0;
        for (++j; j < toks.size(); ++j) {
          const auto& t = toks[j];
          if (t.is_sep("(") || t.is_sep("[") || t.is_sep("{")) ++depth;
          else if (t.is_sep(")") || t.is_sep("]") || t.is_sep("}")) {
            if (--depth < 0) break;
          } else if (depth == 0 && (t.is_sep(",") || t.is_sep(";"))) break;
        }
      }
      if (j + 1 < toks.size() && toks[j].is_sep(",") && detail::is_name(toks[j + 1]) &&
          (j + 2 >= toks.size() || toks[j + 2].is_op("=") || toks[j + 2].is_sep(";") || toks[j + 2].is_sep(",") ||
           toks[j + 2].is_sep("["))) {
        std::size_t next_id = j + 1;
        std::string t2 = type;
        j = next_id + 1;
        while (j + 1 < toks.size() && toks[j].is_sep("[") && toks[j + 1].is_sep("]")) {
          t2 += "array";
          j += 2;
        }
        decl_at[next_id] = t2;
        continue;
      }
      break;
    }
  }

  std::vector<AnnotatedToken> out;
  out.reserve(toks.size());
  ScopeTable scopes;
  std::unordered_map<std::string, std::string> pending;
  int paren = 0;

  for (std::size_t i = 0; i < toks.size(); ++i) {
    const auto& t = toks[i];
    AnnotatedToken at{t, std::nullopt};

    if (auto d = decl_at.find(i); d != decl_at.end()) {
      if (paren > 0)
        pending[t.text] = d->second;
      else
        scopes.declare(t.text, d->second);
    }

    if (t.kind == TokenKind::identifier) {
      const bool member = i > 0 && (toks[i - 1].is_sep(".") || toks[i - 1].is_op("::"));
      const bool call = i + 1 < toks.size() && toks[i + 1].is_sep("(");
      if (!member && !call) {
        if (auto p = pending.find(t.text); p != pending.end())
          at.type = p->second;
        else
          at.type = scopes.lookup(t.text);
      }
    } else if (t.is_sep("(")) {
      ++paren;
    } else if (t.is_sep(")")) {
      if (paren > 0) --paren;
    } else if (t.is_sep("{")) {
      scopes.push();
      scopes.declare_in(std::move(pending));
      pending.clear();
    } else if (t.is_sep("}")) {
      scopes.pop();
      pending.clear();
    } else if (t.is_sep(";") && paren == 0) {
      pending.clear();
    }
    out.push_back(std::move(at));
  }
  return out;
}

// Type-based rewrite: literals -> <type>val, resolved identifiers ->
// <type>var, everything else verbatim; all output lowercased.
inline std::vector<RegularizedToken> regularize(const std::vector<AnnotatedToken>& toks) {
  std::vector<RegularizedToken> out;
  out.reserve(toks.size());
  for (std::size_t i = 0; i < toks.size(); ++i) {
    const auto& t = toks[i].token;
    RegularizedToken r{to_lower(t.text), t.kind, false};
    switch (t.kind) {
      case TokenKind::int_lit: r = {"intval", t.kind, true}; break;
      case TokenKind::long_lit: r = {"longval", t.kind, true}; break;
      case TokenKind::float_lit: r = {"floatval", t.kind, true}; break;
      case TokenKind::double_lit: r = {"doubleval", t.kind, true}; break;
      case TokenKind::char_lit: r = {"charval", t.kind, true}; break;
      case TokenKind::string_lit: r = {"stringval", t.kind, true}; break;
      case TokenKind::identifier: {
        const bool call = i + 1 < toks.size() && toks[i + 1].token.is_sep("(");
        if (!call && toks[i].type) r = {to_lower(*toks[i].type) + "var", t.kind, true};
        break;
      }
      default: break;
    }
    out.push_back(std::move(r));
  }
  return out;
}

inline std::vector<RegularizedToken> regularize_tokens(const std::vector<Token>& toks) {
  return regularize(resolve_types(toks));
}

// Regularized token texts grouped by the source line they came from. Lines
// without tokens are dropped.
inline std::vector<std::vector<std::string>> regularize_lines(std::string_view text) {
  const auto toks = lex(text);
  const auto reg = regularize_tokens(toks);
  std::vector<std::vector<std::string>> lines;
  std::size_t last_line = 0;
  for (std::size_t i = 0; i < toks.size(); ++i) {
    if (lines.empty() || toks[i].line != last_line) {
      lines.emplace_back();
      last_line = toks[i].line;
    }
    lines.back().push_back(reg[i].text);
  }
  return lines;
}

// The unregularized baseline: lowercased token texts grouped by line.
inline std::vector<std::vector<std::string>> raw_token_lines(std::string_view text) {
  const auto toks = lex(text);
  std::vector<std::vector<std::string>> lines;
  std::size_t last_line = 0;
  for (const auto& t : toks) {
    if (lines.empty() || t.line != last_line) {
      lines.emplace_back();
      last_line = t.line;
    }
    lines.back().push_back(to_lower(t.text));
  }
  return lines;
}

}  // namespace codegru
