#pragma once

#include <algorithm>
#include <concepts>
#include <cstdio>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "codegru/context.hpp"
#include "codegru/errors.hpp"
#include "codegru/neural_lm.hpp"
#include "codegru/vocabulary.hpp"

namespace codegru {

inline const std::vector<std::size_t> default_ks = {1, 3, 5, 10};

// Anything that maps a context to a probability row over the vocabulary.
template <class P>
concept Predictor = requires(const P& p, std::span<const TokenId> ctx) {
  { p(ctx) } -> std::convertible_to<RowVector>;
};

struct ModelPredictor {
  const ModelParams& params;
  RowVector operator()(std::span<const TokenId> ctx) const { return predict(params, ctx); }
};

struct EvalReport {
  std::string model;
  std::string context_mode;
  std::vector<std::size_t> ks;
  std::vector<double> accuracy;  // parallel to ks
  double mrr = 0.0;
  double cross_entropy_bits = 0.0;
  std::size_t example_count = 0;

  double accuracy_at(std::size_t k) const {
    for (std::size_t i = 0; i < ks.size(); ++i)
      if (ks[i] == k) return accuracy[i];
    throw EvaluationError("k=" + std::to_string(k) + " not in report");
  }

  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

// 1-based position of `target` when ids are sorted by descending probability,
// ties broken by ascending id.
inline std::size_t rank_of(std::span<const double> probs, TokenId target) {
  const auto t = static_cast<std::size_t>(target);
  const double pt = probs[t];
  std::size_t rank = 1;
  for (std::size_t j = 0; j < probs.size(); ++j) {
    if (probs[j] > pt || (probs[j] == pt && j < t)) ++rank;
  }
  return rank;
}

struct ScoredExample {
  std::size_t rank = 0;  // 0 marks an UNK target: never a hit
  double loss_bits = 0.0;
};

inline ScoredExample score_prediction(std::span<const double> probs, TokenId target) {
  if (target < 0 || static_cast<std::size_t>(target) >= probs.size()) throw VectorizationError("target id out of range");
  ScoredExample s;
  s.loss_bits = loss(probs, target);
  s.rank = target == unk_id ? 0 : rank_of(probs, target);
  return s;
}

inline EvalReport summarize(std::span<const ScoredExample> scored, std::vector<std::size_t> ks = default_ks) {
  if (scored.empty()) throw EvaluationError("cannot evaluate an empty example set");
  std::sort(ks.begin(), ks.end());
  EvalReport r;
  r.ks = ks;
  r.accuracy.assign(ks.size(), 0.0);
  std::vector<std::size_t> hits(ks.size(), 0);
  double rr = 0.0;
  double ce = 0.0;
  for (const auto& s : scored) {
    ce += s.loss_bits;
    if (s.rank == 0) continue;
    rr += 1.0 / static_cast<double>(s.rank);
    for (std::size_t i = 0; i < ks.size(); ++i)
      if (s.rank <= ks[i]) ++hits[i];
  }
  const auto m = static_cast<double>(scored.size());
  for (std::size_t i = 0; i < ks.size(); ++i) r.accuracy[i] = static_cast<double>(hits[i]) / m;
  r.mrr = rr / m;
  r.cross_entropy_bits = ce / m;
  r.example_count = scored.size();
  return r;
}

template <Predictor P>
std::vector<ScoredExample> score_examples(const P& predictor, std::span<const TrainingExample> examples) {
  std::vector<ScoredExample> out;
  out.reserve(examples.size());
  for (const auto& ex : examples) {
    const RowVector probs = predictor(std::span<const TokenId>(ex.context));
    out.push_back(score_prediction(std::span<const double>(probs.data(), static_cast<std::size_t>(probs.size())), ex.target));
  }
  return out;
}

template <Predictor P>
EvalReport evaluate(const P& predictor, std::span<const TrainingExample> examples, std::vector<std::size_t> ks = default_ks) {
  if (examples.empty()) throw EvaluationError("cannot evaluate an empty example set");
  const auto scored = score_examples(predictor, examples);
  return summarize(scored, std::move(ks));
}

template <Predictor P>
double top_k_accuracy(const P& predictor, std::span<const TrainingExample> examples, std::size_t k) {
  return evaluate(predictor, examples, {k}).accuracy.front();
}

template <Predictor P>
double mrr(const P& predictor, std::span<const TrainingExample> examples) {
  return evaluate(predictor, examples, {1}).mrr;
}

template <Predictor P>
double cross_entropy(const P& predictor, std::span<const TrainingExample> examples) {
  return evaluate(predictor, examples, {1}).cross_entropy_bits;
}

inline EvalReport evaluate_model(const ModelParams& params, std::span<const TrainingExample> examples,
                                 std::vector<std::size_t> ks = default_ks) {
  return evaluate(ModelPredictor{params}, examples, std::move(ks));
}

// Aligned text table, one row per report in input order.
inline std::string compare_report(std::span<const EvalReport> reports) {
  if (reports.empty()) return "";
  std::vector<std::size_t> ks = reports.front().ks;
  std::size_t name_w = 5;
  for (const auto& r : reports) name_w = std::max(name_w, r.model.size());
  std::ostringstream out;
  char buf[64];
  auto cell = [&](const std::string& s, std::size_t w) {
    out << s;
    for (std::size_t i = s.size(); i < w; ++i) out << ' ';
  };
  cell("model", name_w + 2);
  cell("mode", 10);
  for (auto k : ks) cell("acc@" + std::to_string(k), 9);
  cell("mrr", 8);
  cell("xent", 9);
  out << "examples\n";
  for (const auto& r : reports) {
    cell(r.model, name_w + 2);
    cell(r.context_mode, 10);
    for (auto k : ks) {
      std::snprintf(buf, sizeof buf, "%.2f", 100.0 * r.accuracy_at(k));
      cell(buf, 9);
    }
    std::snprintf(buf, sizeof buf, "%.4f", r.mrr);
    cell(buf, 8);
    std::snprintf(buf, sizeof buf, "%.4f", r.cross_entropy_bits);
    cell(buf, 9);
    out << r.example_count << '\n';
  }
  return out.str();
}

inline nlohmann::json to_json(const EvalReport& r) {
  nlohmann::json acc = nlohmann::json::object();
  for (std::size_t i = 0; i < r.ks.size(); ++i) acc[std::to_string(r.ks[i])] = r.accuracy[i];
  return {{"model", r.model},
          {"context_mode", r.context_mode},
          {"accuracy", acc},
          {"mrr", r.mrr},
          {"cross_entropy_bits", r.cross_entropy_bits},
          {"example_count", r.example_count}};
}

inline std::string export_reports(std::span<const EvalReport> reports) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : reports) arr.push_back(to_json(r));
  return arr.dump(2);
}

inline std::vector<EvalReport> parse_reports(const std::string& text) {
  std::vector<EvalReport> out;
  try {
    for (const auto& j : nlohmann::json::parse(text)) {
      EvalReport r;
      r.model = j.at("model").get<std::string>();
      r.context_mode = j.at("context_mode").get<std::string>();
      for (const auto& [k, v] : j.at("accuracy").items()) {
        r.ks.push_back(std::stoul(k));
        r.accuracy.push_back(v.get<double>());
      }
      // object keys come back in lexical order; restore numeric order
      std::vector<std::size_t> idx(r.ks.size());
      for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
      std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return r.ks[a] < r.ks[b]; });
      std::vector<std::size_t> ks;
      std::vector<double> acc;
      for (auto i : idx) {
        ks.push_back(r.ks[i]);
        acc.push_back(r.accuracy[i]);
      }
      r.ks = std::move(ks);
      r.accuracy = std::move(acc);
      r.mrr = j.at("mrr").get<double>();
      r.cross_entropy_bits = j.at("cross_entropy_bits").get<double>();
      r.example_count = j.at("example_count").get<std::size_t>();
      out.push_back(std::move(r));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed report export: ") + e.what(), 0);
  }
  return out;
}

}  // namespace codegru
