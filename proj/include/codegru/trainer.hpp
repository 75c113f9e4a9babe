#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "codegru/config.hpp"
#include "codegru/context.hpp"
#include "codegru/errors.hpp"
#include "codegru/neural_lm.hpp"
#include "codegru/rng.hpp"

namespace codegru {

struct TrainResult {
  ModelParams params;
  std::vector<double> loss_history;  // mean per-example loss (bits), one entry per epoch
};

using EpochCallback = std::function<void(std::size_t epoch, double loss)>;

namespace detail {

inline void check_model_matches(const ModelParams& m, const TrainConfig& c) {
  if (m.dims.embed != c.embed_dim || m.dims.hidden != c.hidden_dim)
    throw ConfigError("model dimensions (" + std::to_string(m.dims.embed) + ", " + std::to_string(m.dims.hidden) +
                      ") do not match config (" + std::to_string(c.embed_dim) + ", " + std::to_string(c.hidden_dim) + ")");
  if (m.cell != c.cell_kind) throw ConfigError("model cell kind does not match config");
  if (m.use_bias != c.use_bias) throw ConfigError("model bias mode does not match config");
}

// Batches never mix context lengths.
inline std::vector<std::vector<std::size_t>> make_batches(const std::vector<TrainingExample>& examples,
                                                          std::size_t batch_size, Rng& rng) {
  std::vector<std::size_t> order(examples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng.shuffle(std::span(order));

  std::map<std::size_t, std::vector<std::size_t>> buckets;
  for (auto i : order) buckets[examples[i].context.size()].push_back(i);

  std::vector<std::vector<std::size_t>> batches;
  for (auto& [_, bucket] : buckets) {
    for (std::size_t s = 0; s < bucket.size(); s += batch_size) {
      const auto e = std::min(bucket.size(), s + batch_size);
      batches.emplace_back(bucket.begin() + static_cast<std::ptrdiff_t>(s), bucket.begin() + static_cast<std::ptrdiff_t>(e));
    }
  }
  rng.shuffle(std::span(batches));
  return batches;
}

}  // namespace detail

// Mini-batch Adam on mean categorical cross-entropy. Every epoch reshuffles
// with the run seed, buckets by context length and visits the batches in a
// shuffled order. Inverted dropout on the final hidden state.
inline TrainResult train(ModelParams model, const std::vector<TrainingExample>& examples, const TrainConfig& config,
                         const EpochCallback& on_epoch = {}) {
  config.validate();
  detail::check_model_matches(model, config);

  TrainResult result{std::move(model), {}};
  if (config.epochs == 0 || examples.empty()) return result;

  ModelParams& params = result.params;
  AdamState adam;
  Rng rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  const double keep = 1.0 - config.dropout_rate;
  const auto H = static_cast<Eigen::Index>(params.dims.hidden);

  std::vector<std::span<const TokenId>> contexts;
  std::vector<TokenId> targets;
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    double total = 0.0;
    const auto batches = detail::make_batches(examples, config.batch_size, rng);
    for (std::size_t bi = 0; bi < batches.size(); ++bi) {
      const auto& batch = batches[bi];
      contexts.clear();
      targets.clear();
      for (auto i : batch) {
        contexts.emplace_back(examples[i].context);
        targets.push_back(examples[i].target);
      }
      Matrix mask;
      if (config.dropout_rate > 0.0) {
        mask.resize(static_cast<Eigen::Index>(batch.size()), H);
        for (Eigen::Index k = 0; k < mask.size(); ++k) mask.data()[k] = rng.uniform() < keep ? 1.0 / keep : 0.0;
      }
      const auto cache = forward_batch(params, contexts, mask.size() ? &mask : nullptr);
      const double batch_mean = batch_loss(cache, targets);
      if (!std::isfinite(batch_mean))
        throw DivergenceError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " + std::to_string(bi));
      total += batch_mean * static_cast<double>(batch.size());
      const auto grads = backward(cache, targets, params);
      try {
        adam_update(params, grads, adam, config.learning_rate);
      } catch (const DivergenceError&) {
        throw DivergenceError("non-finite gradient at epoch " + std::to_string(epoch) + ", batch " + std::to_string(bi));
      }
    }
    const double mean = total / static_cast<double>(examples.size());
    result.loss_history.push_back(mean);
    if (on_epoch) on_epoch(epoch, mean);
  }
  return result;
}

// Two-column "epoch loss" text.
inline void write_loss_history(std::ostream& out, const std::vector<double>& history) {
  out.precision(17);
  for (std::size_t i = 0; i < history.size(); ++i) out << (i + 1) << ' ' << history[i] << '\n';
}

}  // namespace codegru
