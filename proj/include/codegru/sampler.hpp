#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "codegru/errors.hpp"
#include "codegru/lexer.hpp"

namespace codegru {

struct Diagnostic {
  std::size_t line;
  std::string message;

  friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
};

struct StrippedText {
  std::string text;
  std::vector<Diagnostic> diagnostics;  // non-empty only for an unterminated block comment
};

// Removes `//` line comments and `/* */` block comments (Javadoc included).
// String and char literals are copied through untouched. Newlines inside a
// block comment are kept so line numbers of the surrounding code survive.
inline StrippedText strip_comments(std::string_view text) {
  enum class State { code, string, chr, line_comment, block_comment };
  StrippedText out;
  out.text.reserve(text.size());
  State state = State::code;
  std::size_t line = 1;
  std::size_t block_start = 0;
  std::size_t block_start_line = 0;

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    const char next = i + 1 < text.size() ? text[i + 1] : '\0';
    switch (state) {
      case State::code:
        if (c == '/' && next == '/') {
          state = State::line_comment;
          ++i;
        } else if (c == '/' && next == '*') {
          state = State::block_comment;
          block_start = out.text.size();
          block_start_line = line;
          ++i;
        } else {
          if (c == '"') state = State::string;
          if (c == '\'') state = State::chr;
          out.text += c;
        }
        break;
      case State::string:
      case State::chr:
        out.text += c;
        if (c == '\\' && next != '\n' && next != '\0') {
          out.text += next;
          ++i;
        } else if ((state == State::string && c == '"') || (state == State::chr && c == '\'') || c == '\n') {
          state = State::code;
        }
        break;
      case State::line_comment:
        if (c == '\n') {
          out.text += c;
          state = State::code;
        }
        break;
      case State::block_comment:
        if (c == '*' && next == '/') {
          state = State::code;
          ++i;
        } else if (c == '\n') {
          out.text += c;
        }
        break;
    }
    if (c == '\n') ++line;
  }

  if (state == State::block_comment) {
    out.text.resize(block_start);
    out.diagnostics.push_back({block_start_line, "unterminated block comment"});
  }
  return out;
}

struct ValidityReport {
  bool ok = true;
  std::vector<Diagnostic> diagnostics;
};

// Stand-in for compiling the file: the text must lex cleanly and its (), {}
// and [] must balance and nest. Used to filter training data only.
inline ValidityReport validate(std::string_view text) {
  ValidityReport report;
  const auto lexed = lex_collect(text);
  for (const auto& e : lexed.errors) report.diagnostics.push_back({e.line, e.message});

  struct Open {
    char ch;
    std::size_t line;
  };
  std::vector<Open> stack;
  for (const auto& t : lexed.tokens) {
    if (t.kind != TokenKind::separator || t.text.size() != 1) continue;
    const char c = t.text[0];
    if (c == '(' || c == '{' || c == '[') {
      stack.push_back({c, t.line});
    } else if (c == ')' || c == '}' || c == ']') {
      const char want = c == ')' ? '(' : c == '}' ? '{' : '[';
      if (!stack.empty() && stack.back().ch == want) {
        stack.pop_back();
      } else {
        report.diagnostics.push_back({t.line, std::string("unbalanced ") + c + " at line " + std::to_string(t.line)});
      }
    }
  }
  for (const auto& o : stack)
    report.diagnostics.push_back({o.line, std::string("unbalanced ") + o.ch + " at line " + std::to_string(o.line)});

  report.ok = report.diagnostics.empty();
  return report;
}

struct CleanFile {
  std::filesystem::path origin_path;
  std::vector<std::string> lines;
  std::vector<Diagnostic> diagnostics;

  std::string text() const {
    std::string s;
    for (const auto& l : lines) {
      s += l;
      s += '\n';
    }
    return s;
  }
};

inline constexpr std::size_t indent_width = 4;

// Re-lays out valid source one logical statement per line. A break goes
// after every `;`, `{` and `}` outside parentheses, and wherever the input
// already had a newline. A `}` stays joined to a directly following
// else/catch/finally, to the `while` of a do-while, and to `;` `,` `)`.
// Indentation is recomputed from brace depth; intra-line spacing is kept.
inline CleanFile normalize_structure(std::string_view text, std::filesystem::path origin = {}) {
  const auto report = validate(text);
  if (!report.ok) {
    throw ValidityError("cannot normalize invalid source: " + report.diagnostics.front().message);
  }
  const auto tokens = lex(text);

  CleanFile file;
  file.origin_path = std::move(origin);

  std::string current;
  int depth = 0;
  int paren = 0;
  bool line_open = false;
  // One flag per open brace: true when the block belongs to a `do`.
  std::vector<bool> do_blocks;

  auto end_line = [&] {
    while (!current.empty() && (current.back() == ' ' || current.back() == '\t')) current.pop_back();
    if (!current.empty()) file.lines.push_back(current);
    current.clear();
    line_open = false;
  };

  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const auto& tok = tokens[i];
    if (line_open) {
      const auto& prev = tokens[i - 1];
      const auto gap = text.substr(prev.offset + prev.text.size(), tok.offset - prev.offset - prev.text.size());
      if (gap.find('\n') != std::string_view::npos) {
        end_line();
      } else {
        current += gap;
      }
    }
    if (!line_open) {
      int d = depth - (tok.is_sep("}") ? 1 : 0);
      if (d < 0) d = 0;
      current.assign(static_cast<std::size_t>(d) * indent_width, ' ');
      line_open = true;
    }
    current += tok.text;

    bool is_do_block = false;
    if (tok.is_sep("(")) ++paren;
    if (tok.is_sep(")") && paren > 0) --paren;
    if (tok.is_sep("{")) {
      is_do_block = i > 0 && tokens[i - 1].is(TokenKind::keyword, "do");
      do_blocks.push_back(is_do_block);
      ++depth;
    }
    bool closed_do = false;
    if (tok.is_sep("}")) {
      if (!do_blocks.empty()) {
        closed_do = do_blocks.back();
        do_blocks.pop_back();
      }
      if (depth > 0) --depth;
    }

    if (paren > 0) continue;
    bool breaks = tok.is_sep(";") || tok.is_sep("{") || tok.is_sep("}");
    if (breaks && tok.is_sep("}") && i + 1 < tokens.size()) {
      const auto& nx = tokens[i + 1];
      if (nx.is(TokenKind::keyword, "else") || nx.is(TokenKind::keyword, "catch") ||
          nx.is(TokenKind::keyword, "finally") || nx.is_sep(";") || nx.is_sep(",") || nx.is_sep(")") ||
          (closed_do && nx.is(TokenKind::keyword, "while")))
        breaks = false;
    }
    if (breaks) end_line();
  }
  end_line();
  return file;
}

// Full sampler pass for one training file: strip, validate, normalize.
// Returns the validity report; `out` is filled only when the file is kept.
inline ValidityReport sample_file(std::string_view raw, const std::filesystem::path& origin, CleanFile& out) {
  auto stripped = strip_comments(raw);
  auto report = validate(stripped.text);
  for (auto& d : stripped.diagnostics) report.diagnostics.insert(report.diagnostics.begin(), d);
  report.ok = report.diagnostics.empty();
  if (report.ok) out = normalize_structure(stripped.text, origin);
  return report;
}

}  // namespace codegru
