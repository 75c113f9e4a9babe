#pragma once

#include <cstdint>
#include <istream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "codegru/context.hpp"
#include "codegru/errors.hpp"
#include "codegru/neural_lm.hpp"

namespace codegru {

enum class TokenMode { regularized, raw };

inline std::string to_string(TokenMode m) { return m == TokenMode::regularized ? "regularized" : "raw"; }

inline TokenMode parse_token_mode(const std::string& s) {
  if (s == "regularized") return TokenMode::regularized;
  if (s == "raw") return TokenMode::raw;
  throw ConfigError("unknown token mode '" + s + "' (expected regularized|raw)");
}

struct TrainConfig {
  std::size_t n = 20;
  std::size_t batch_size = 512;
  std::size_t epochs = 100;
  double learning_rate = 0.001;
  double dropout_rate = 0.2;
  std::size_t embed_dim = 300;
  std::size_t hidden_dim = 300;
  CellKind cell_kind = CellKind::gru;
  ContextMode context_mode = ContextMode::variable;
  std::uint64_t seed = 0;

  bool use_bias = true;
  bool reset_per_line = false;
  TokenMode tokens = TokenMode::regularized;
  int fold_count = 10;
  int test_fold = 0;
  bool per_project_split = true;

  void validate() const {
    if (n < 1) throw ConfigError("n must be at least 1");
    if (batch_size < 1) throw ConfigError("batch_size must be positive");
    if (embed_dim < 1 || hidden_dim < 1) throw ConfigError("embed_dim and hidden_dim must be positive");
    if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) throw ConfigError("dropout_rate must be in [0, 1)");
    if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
    if (fold_count < 2) throw ConfigError("fold_count must be at least 2");
    if (test_fold < 0 || test_fold >= fold_count) throw ConfigError("test_fold must be in [0, fold_count)");
  }

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

namespace detail {

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("key '" + key + "': expected a boolean, got '" + v + "'");
}

template <class T>
T parse_number(const std::string& key, const std::string& v) {
  std::istringstream in(v);
  T out{};
  in >> out;
  if (!in || !in.eof()) throw ConfigError("key '" + key + "': cannot parse '" + v + "' as a number");
  return out;
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace detail

// Applies one `key = value` setting.
inline void apply_setting(TrainConfig& c, const std::string& key, const std::string& value) {
  using detail::parse_number;
  if (key == "n") c.n = parse_number<std::size_t>(key, value);
  else if (key == "batch_size") c.batch_size = parse_number<std::size_t>(key, value);
  else if (key == "epochs") c.epochs = parse_number<std::size_t>(key, value);
  else if (key == "learning_rate") c.learning_rate = parse_number<double>(key, value);
  else if (key == "dropout_rate") c.dropout_rate = parse_number<double>(key, value);
  else if (key == "embed_dim") c.embed_dim = parse_number<std::size_t>(key, value);
  else if (key == "hidden_dim") c.hidden_dim = parse_number<std::size_t>(key, value);
  else if (key == "cell_kind") c.cell_kind = parse_cell_kind(value);
  else if (key == "context_mode") c.context_mode = parse_context_mode(value);
  else if (key == "seed") c.seed = parse_number<std::uint64_t>(key, value);
  else if (key == "use_bias") c.use_bias = detail::parse_bool(key, value);
  else if (key == "reset_per_line") c.reset_per_line = detail::parse_bool(key, value);
  else if (key == "tokens") c.tokens = parse_token_mode(value);
  else if (key == "fold_count") c.fold_count = parse_number<int>(key, value);
  else if (key == "test_fold") c.test_fold = parse_number<int>(key, value);
  else if (key == "per_project_split") c.per_project_split = detail::parse_bool(key, value);
  else throw ConfigError("unknown config key '" + key + "'");
}

// key=value lines; `#` starts a comment; blank lines ignored.
inline TrainConfig parse_config(std::istream& in, TrainConfig base = {}) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(lineno) + ": expected key=value");
    apply_setting(base, detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
  }
  return base;
}

inline nlohmann::json to_json(const TrainConfig& c) {
  return {{"n", c.n},
          {"batch_size", c.batch_size},
          {"epochs", c.epochs},
          {"learning_rate", c.learning_rate},
          {"dropout_rate", c.dropout_rate},
          {"embed_dim", c.embed_dim},
          {"hidden_dim", c.hidden_dim},
          {"cell_kind", to_string(c.cell_kind)},
          {"context_mode", to_string(c.context_mode)},
          {"seed", c.seed},
          {"use_bias", c.use_bias},
          {"reset_per_line", c.reset_per_line},
          {"tokens", to_string(c.tokens)},
          {"fold_count", c.fold_count},
          {"test_fold", c.test_fold},
          {"per_project_split", c.per_project_split}};
}

inline TrainConfig config_from_json(const nlohmann::json& j) {
  TrainConfig c;
  c.n = j.at("n").get<std::size_t>();
  c.batch_size = j.at("batch_size").get<std::size_t>();
  c.epochs = j.at("epochs").get<std::size_t>();
  c.learning_rate = j.at("learning_rate").get<double>();
  c.dropout_rate = j.at("dropout_rate").get<double>();
  c.embed_dim = j.at("embed_dim").get<std::size_t>();
  c.hidden_dim = j.at("hidden_dim").get<std::size_t>();
  c.cell_kind = parse_cell_kind(j.at("cell_kind").get<std::string>());
  c.context_mode = parse_context_mode(j.at("context_mode").get<std::string>());
  c.seed = j.at("seed").get<std::uint64_t>();
  c.use_bias = j.at("use_bias").get<bool>();
  c.reset_per_line = j.at("reset_per_line").get<bool>();
  c.tokens = parse_token_mode(j.at("tokens").get<std::string>());
  c.fold_count = j.at("fold_count").get<int>();
  c.test_fold = j.at("test_fold").get<int>();
  c.per_project_split = j.at("per_project_split").get<bool>();
  return c;
}

}  // namespace codegru
