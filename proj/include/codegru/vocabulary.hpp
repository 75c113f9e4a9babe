#pragma once

#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "codegru/errors.hpp"

namespace codegru {

using TokenId = std::int32_t;
using TokenStream = std::vector<std::string>;

inline constexpr TokenId pad_id = 0;
inline constexpr TokenId unk_id = 1;
inline constexpr TokenId first_regular_id = 2;
inline constexpr const char* pad_token = "<pad>";
inline constexpr const char* unk_token = "<unk>";

// Token <-> id bijection. Ids 0 and 1 are PAD and UNK; real tokens get ids
// from 2 upward in first-occurrence order.
class Vocabulary {
 public:
  Vocabulary() : id_to_token_{pad_token, unk_token} {}

  // Rebuilds a vocabulary from its id-ordered token list (reserved slots included).
  static Vocabulary from_tokens(const std::vector<std::string>& id_order) {
    if (id_order.size() < 2 || id_order[0] != pad_token || id_order[1] != unk_token)
      throw InputError("vocabulary must start with the reserved <pad>, <unk> entries");
    Vocabulary v;
    for (std::size_t i = 2; i < id_order.size(); ++i) {
      if (id_order[i].empty()) throw InputError("empty token in vocabulary at id " + std::to_string(i));
      if (!v.add(id_order[i]).second) throw InputError("duplicate token in vocabulary: " + id_order[i]);
    }
    return v;
  }

  // Returns (id, inserted).
  std::pair<TokenId, bool> add(const std::string& token) {
    auto [it, inserted] = token_to_id_.try_emplace(token, static_cast<TokenId>(id_to_token_.size()));
    if (inserted) id_to_token_.push_back(token);
    return {it->second, inserted};
  }

  TokenId id(const std::string& token) const {
    auto it = token_to_id_.find(token);
    return it == token_to_id_.end() ? unk_id : it->second;
  }

  bool contains(const std::string& token) const { return token_to_id_.count(token) != 0; }

  const std::string& token(TokenId id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= id_to_token_.size())
      throw VectorizationError("token id out of range: " + std::to_string(id));
    return id_to_token_[static_cast<std::size_t>(id)];
  }

  std::size_t size() const { return id_to_token_.size(); }
  // Number of non-reserved entries.
  std::size_t regular_size() const { return id_to_token_.size() - 2; }
  bool only_reserved() const { return regular_size() == 0; }

  const std::vector<std::string>& tokens() const { return id_to_token_; }

  static bool is_reserved(TokenId id) { return id == pad_id || id == unk_id; }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.id_to_token_ == b.id_to_token_; }

 private:
  std::unordered_map<std::string, TokenId> token_to_id_;
  std::vector<std::string> id_to_token_;
};

inline Vocabulary build_vocab(const std::vector<TokenStream>& streams) {
  Vocabulary v;
  for (const auto& s : streams)
    for (const auto& t : s) v.add(t);
  return v;
}

inline std::vector<TokenId> vectorize(const TokenStream& stream, const Vocabulary& vocab) {
  std::vector<TokenId> ids;
  ids.reserve(stream.size());
  for (const auto& t : stream) ids.push_back(vocab.id(t));
  return ids;
}

// Standalone vocabulary file: one token per line in id order.
inline void write_vocab(std::ostream& out, const Vocabulary& vocab) {
  for (const auto& t : vocab.tokens()) out << t << '\n';
}

inline Vocabulary read_vocab(std::istream& in) {
  std::vector<std::string> toks;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    toks.push_back(line);
  }
  return Vocabulary::from_tokens(toks);
}

struct VocabStats {
  std::size_t v_norm = 0;
  std::size_t v_codegru = 0;
  double percent_decrease = 0.0;  // rounded to 2 decimals
};

inline double percent_decrease(std::size_t v_norm, std::size_t v_codegru) {
  if (v_norm == 0) throw StatsError("V_Norm is zero; vocabulary reduction is undefined");
  const double raw = 100.0 * (static_cast<double>(v_norm) - static_cast<double>(v_codegru)) / static_cast<double>(v_norm);
  return std::round(raw * 100.0) / 100.0;
}

inline std::size_t unique_tokens(const std::vector<TokenStream>& streams) {
  std::unordered_set<std::string> seen;
  for (const auto& s : streams) seen.insert(s.begin(), s.end());
  return seen.size();
}

// Vocabulary sizes (reserved ids excluded) with and without regularization.
inline VocabStats vocab_stats(const std::vector<TokenStream>& raw_streams,
                              const std::vector<TokenStream>& regularized_streams) {
  VocabStats s;
  s.v_norm = unique_tokens(raw_streams);
  s.v_codegru = unique_tokens(regularized_streams);
  s.percent_decrease = percent_decrease(s.v_norm, s.v_codegru);
  return s;
}

}  // namespace codegru
