#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "codegru/errors.hpp"
#include "codegru/vocabulary.hpp"

namespace codegru {

enum class ContextMode { variable, fixed };

inline std::string to_string(ContextMode m) { return m == ContextMode::variable ? "variable" : "fixed"; }

inline ContextMode parse_context_mode(const std::string& s) {
  if (s == "variable") return ContextMode::variable;
  if (s == "fixed") return ContextMode::fixed;
  throw ConfigError("unknown context mode '" + s + "' (expected variable|fixed)");
}

struct ExampleOrigin {
  std::size_t file = 0;
  std::size_t line = 1;   // 1-based line of the target token
  std::size_t index = 0;  // position of the target within its line
};

struct TrainingExample {
  std::vector<TokenId> context;
  TokenId target = unk_id;
  ExampleOrigin origin;
};

// A vectorized file that keeps its line structure.
struct IdFile {
  std::size_t file_index = 0;
  std::vector<std::vector<TokenId>> lines;

  std::size_t token_count() const {
    std::size_t n = 0;
    for (const auto& l : lines) n += l.size();
    return n;
  }
};

namespace detail {

struct FlatToken {
  TokenId id;
  std::size_t line;
  std::size_t index;
};

inline std::vector<FlatToken> flatten(const IdFile& file) {
  std::vector<FlatToken> flat;
  for (std::size_t l = 0; l < file.lines.size(); ++l)
    for (std::size_t k = 0; k < file.lines[l].size(); ++k) flat.push_back({file.lines[l][k], l + 1, k});
  return flat;
}

inline void check_bound(std::size_t n) {
  if (n < 1) throw ConfigError("context bound n must be at least 1");
}

}  // namespace detail

// Growing context capped at n: every token after the first is a target, and
// its context is the up-to-n tokens before it. Line boundaries do not reset
// the context unless reset_per_line is set, in which case each line is
// treated as its own stream.
inline std::vector<TrainingExample> gen_variable_context(const IdFile& file, std::size_t n, bool reset_per_line = false) {
  detail::check_bound(n);
  std::vector<TrainingExample> out;
  if (reset_per_line) {
    for (std::size_t l = 0; l < file.lines.size(); ++l) {
      const auto& line = file.lines[l];
      for (std::size_t p = 1; p < line.size(); ++p) {
        const std::size_t start = p > n ? p - n : 0;
        out.push_back({{line.begin() + static_cast<std::ptrdiff_t>(start), line.begin() + static_cast<std::ptrdiff_t>(p)},
                       line[p],
                       {file.file_index, l + 1, p}});
      }
    }
    return out;
  }
  const auto flat = detail::flatten(file);
  if (flat.size() < 2) return out;
  out.reserve(flat.size() - 1);
  for (std::size_t p = 1; p < flat.size(); ++p) {
    const std::size_t start = p > n ? p - n : 0;
    TrainingExample ex;
    ex.context.reserve(p - start);
    for (std::size_t q = start; q < p; ++q) ex.context.push_back(flat[q].id);
    ex.target = flat[p].id;
    ex.origin = {file.file_index, flat[p].line, flat[p].index};
    out.push_back(std::move(ex));
  }
  return out;
}

// Sliding window of exactly n tokens; T - n examples for a T-token file.
inline std::vector<TrainingExample> gen_fixed_context(const IdFile& file, std::size_t n,
                                                      std::vector<std::string>* warnings = nullptr) {
  detail::check_bound(n);
  std::vector<TrainingExample> out;
  const auto flat = detail::flatten(file);
  if (flat.size() <= n) {
    if (warnings)
      warnings->push_back("file " + std::to_string(file.file_index) + " has " + std::to_string(flat.size()) +
                          " tokens, not more than the window " + std::to_string(n) + "; no fixed-window examples");
    return out;
  }
  out.reserve(flat.size() - n);
  for (std::size_t p = n; p < flat.size(); ++p) {
    TrainingExample ex;
    ex.context.reserve(n);
    for (std::size_t q = p - n; q < p; ++q) ex.context.push_back(flat[q].id);
    ex.target = flat[p].id;
    ex.origin = {file.file_index, flat[p].line, flat[p].index};
    out.push_back(std::move(ex));
  }
  return out;
}

inline IdFile single_line_file(std::span<const TokenId> ids, std::size_t file_index = 0) {
  return IdFile{file_index, {std::vector<TokenId>(ids.begin(), ids.end())}};
}

inline std::vector<TrainingExample> gen_examples(const IdFile& file, std::size_t n, ContextMode mode,
                                                 bool reset_per_line = false,
                                                 std::vector<std::string>* warnings = nullptr) {
  return mode == ContextMode::variable ? gen_variable_context(file, n, reset_per_line)
                                       : gen_fixed_context(file, n, warnings);
}

}  // namespace codegru
