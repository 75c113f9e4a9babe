#pragma once

#include <algorithm>
#include <cstdio>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "codegru/errors.hpp"
#include "codegru/lexer.hpp"
#include "codegru/model_io.hpp"
#include "codegru/neural_lm.hpp"
#include "codegru/regularizer.hpp"
#include "codegru/sampler.hpp"

namespace codegru {

struct Suggestion {
  std::string token;
  double probability = 0.0;
  std::size_t rank = 0;
};

enum class StopReason { terminator, max_steps, empty_context };

inline std::string to_string(StopReason r) {
  switch (r) {
    case StopReason::terminator: return "terminator";
    case StopReason::max_steps: return "max_steps";
    case StopReason::empty_context: return "empty_context";
  }
  return "?";
}

struct GenerationResult {
  std::vector<std::string> tokens;
  StopReason stop_reason = StopReason::max_steps;
};

// Runs user code through the same preprocessing as training and returns the
// most recent n token ids.
inline std::vector<TokenId> encode_context(const LanguageModel& model, std::string_view raw_code) {
  const auto stripped = strip_comments(raw_code);
  std::vector<Token> toks;
  try {
    toks = lex(stripped.text);
  } catch (const LexError& e) {
    throw InputError(std::string("cannot tokenize input: ") + e.what());
  }
  if (toks.empty()) throw InputError("input contains no code tokens");

  TokenStream stream;
  stream.reserve(toks.size());
  if (model.config.tokens == TokenMode::regularized) {
    for (auto& r : regularize_tokens(toks)) stream.push_back(std::move(r.text));
  } else {
    for (const auto& t : toks) stream.push_back(to_lower(t.text));
  }
  auto ids = vectorize(stream, model.vocab);
  const std::size_t n = model.config.n;
  if (ids.size() > n) ids.erase(ids.begin(), ids.end() - static_cast<std::ptrdiff_t>(n));
  return ids;
}

// Non-reserved ids by descending probability (ties: ascending id).
inline std::vector<TokenId> ranked_ids(const RowVector& probs) {
  std::vector<TokenId> ids;
  ids.reserve(static_cast<std::size_t>(probs.size()));
  for (TokenId i = first_regular_id; i < static_cast<TokenId>(probs.size()); ++i) ids.push_back(i);
  std::stable_sort(ids.begin(), ids.end(), [&](TokenId a, TokenId b) { return probs(a) > probs(b); });
  return ids;
}

inline std::vector<Suggestion> suggest_ids(const LanguageModel& model, std::span<const TokenId> context, std::size_t k) {
  if (k < 1) throw InputError("k must be at least 1");
  const RowVector probs = predict(model.params, context);
  const auto order = ranked_ids(probs);
  std::vector<Suggestion> out;
  for (std::size_t i = 0; i < std::min(k, order.size()); ++i)
    out.push_back({model.vocab.token(order[i]), probs(order[i]), i + 1});
  return out;
}

// Top-k next-token suggestions for a raw code snippet.
inline std::vector<Suggestion> suggest(const LanguageModel& model, std::string_view raw_code, std::size_t k) {
  const auto ids = encode_context(model, raw_code);
  return suggest_ids(model, ids, k);
}

inline bool is_statement_terminator(const std::string& tok) { return tok == ";" || tok == "{" || tok == "}"; }

inline GenerationResult generate_from_ids(const LanguageModel& model, std::vector<TokenId> context, std::size_t max_steps) {
  if (max_steps < 1) throw InputError("max_steps must be at least 1");
  GenerationResult result;
  if (context.empty() || model.vocab.only_reserved()) {
    result.stop_reason = StopReason::empty_context;
    return result;
  }
  const std::size_t n = model.config.n;
  for (std::size_t step = 0; step < max_steps; ++step) {
    const RowVector probs = predict(model.params, context);
    TokenId best = first_regular_id;
    for (TokenId i = first_regular_id + 1; i < static_cast<TokenId>(probs.size()); ++i)
      if (probs(i) > probs(best)) best = i;
    const auto& tok = model.vocab.token(best);
    result.tokens.push_back(tok);
    if (is_statement_terminator(tok)) {
      result.stop_reason = StopReason::terminator;
      return result;
    }
    context.push_back(best);
    if (context.size() > n) context.erase(context.begin());
  }
  result.stop_reason = StopReason::max_steps;
  return result;
}

// Greedy line completion: append the argmax token until a statement
// terminator (`;`, `{`, `}`) is emitted or max_steps tokens are out.
inline GenerationResult generate(const LanguageModel& model, std::string_view raw_code, std::size_t max_steps = 20) {
  return generate_from_ids(model, encode_context(model, raw_code), max_steps);
}

inline std::string join_tokens(const std::vector<std::string>& toks) {
  std::string s;
  for (const auto& t : toks) {
    if (!s.empty()) s += ' ';
    s += t;
  }
  return s;
}

inline void print_suggestions(std::ostream& out, const std::vector<Suggestion>& sugg) {
  char buf[32];
  for (const auto& s : sugg) {
    std::snprintf(buf, sizeof buf, "%.4f", s.probability);
    out << "  " << s.rank << ". " << s.token << "  (" << buf << ")\n";
  }
}

inline void print_generation(std::ostream& out, const GenerationResult& g) {
  out << "  " << join_tokens(g.tokens) << "  [" << to_string(g.stop_reason) << "]\n";
}

inline constexpr const char* repl_help =
    "enter code to extend the context and see suggestions\n"
    "  :gen        generate a continuation of the current context\n"
    "  :k <n>      show n suggestions\n"
    "  :reset      clear the context\n"
    "  :quit       leave\n";

// Interactive loop. Code lines accumulate into the session context; the
// model only ever sees its last n tokens. Returns the exit status.
inline int repl(const LanguageModel& model, std::istream& in, std::ostream& out, std::size_t k = 5) {
  std::string context;
  std::string line;
  out << "codegru repl, :help for commands\n";
  while (out << "> " << std::flush, std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == ':') {
      std::istringstream cmd(line.substr(1));
      std::string name;
      cmd >> name;
      if (name == "quit" || name == "q") return 0;
      if (name == "help") {
        out << repl_help;
      } else if (name == "reset") {
        context.clear();
      } else if (name == "k") {
        long v = 0;
        if (cmd >> v && v >= 1)
          k = static_cast<std::size_t>(v);
        else
          out << "usage: :k <positive integer>\n";
      } else if (name == "gen") {
        if (context.empty()) {
          out << "context is empty; enter some code first\n";
          continue;
        }
        try {
          const auto g = generate(model, context);
          print_generation(out, g);
          context += ' ' + join_tokens(g.tokens);
        } catch (const Error& e) {
          out << "error: " << e.what() << '\n';
        }
      } else {
        out << "unknown command :" << name << '\n' << repl_help;
      }
      continue;
    }
    const std::string candidate = context.empty() ? line : context + '\n' + line;
    try {
      const auto sugg = suggest(model, candidate, k);
      context = candidate;
      print_suggestions(out, sugg);
    } catch (const Error& e) {
      out << "error: " << e.what() << '\n';
    }
  }
  return 0;
}

}  // namespace codegru
