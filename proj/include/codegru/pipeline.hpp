#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "codegru/config.hpp"
#include "codegru/context.hpp"
#include "codegru/corpus.hpp"
#include "codegru/model_io.hpp"
#include "codegru/regularizer.hpp"
#include "codegru/sampler.hpp"
#include "codegru/trainer.hpp"
#include "codegru/vocabulary.hpp"

namespace codegru {

using TokenLines = std::vector<TokenStream>;

inline TokenLines token_lines(std::string_view clean_text, TokenMode mode) {
  return mode == TokenMode::regularized ? regularize_lines(clean_text) : raw_token_lines(clean_text);
}

inline TokenStream flatten(const TokenLines& lines) {
  TokenStream out;
  for (const auto& l : lines) out.insert(out.end(), l.begin(), l.end());
  return out;
}

// Training files go through the full sampler and are dropped when invalid.
inline std::optional<TokenLines> prepare_training_text(std::string_view raw, TokenMode mode,
                                                       std::vector<Diagnostic>* diagnostics = nullptr) {
  CleanFile clean;
  auto report = sample_file(raw, {}, clean);
  if (!report.ok) {
    if (diagnostics) *diagnostics = std::move(report.diagnostics);
    return std::nullopt;
  }
  return token_lines(clean.text(), mode);
}

// Test files are never filtered for validity: comments are stripped, the
// layout is normalized when the file is structurally valid, and only files
// that cannot be lexed at all are skipped.
inline std::optional<TokenLines> prepare_test_text(std::string_view raw, TokenMode mode) {
  const auto stripped = strip_comments(raw);
  std::string text = stripped.text;
  if (validate(text).ok) text = normalize_structure(text).text();
  try {
    return token_lines(text, mode);
  } catch (const LexError&) {
    return std::nullopt;
  }
}

struct PreparedFile {
  std::filesystem::path path;
  std::string project;
  TokenLines lines;
};

struct Dataset {
  Vocabulary vocab;
  std::vector<PreparedFile> train;
  std::vector<PreparedFile> test;
  std::vector<IdFile> train_ids;
  std::vector<IdFile> test_ids;
  std::vector<std::string> warnings;
  std::size_t dropped_invalid = 0;
};

inline IdFile vectorize_file(const TokenLines& lines, const Vocabulary& vocab, std::size_t index) {
  IdFile f{index, {}};
  for (const auto& l : lines) f.lines.push_back(vectorize(l, vocab));
  return f;
}

// Splits the listing, preprocesses both sides and builds the vocabulary from
// the training folds only.
inline Dataset prepare_dataset(const CorpusListing& listing, const FoldSplit& split, TokenMode mode) {
  Dataset ds;
  ds.warnings = listing.warnings;
  for (const auto& f : listing.files) {
    if (split.is_test(f.path)) {
      if (auto lines = prepare_test_text(f.raw_text, mode))
        ds.test.push_back({f.path, f.project_id, std::move(*lines)});
      else
        ds.warnings.push_back("test file does not lex, skipped: " + f.path.generic_string());
    } else {
      std::vector<Diagnostic> diags;
      if (auto lines = prepare_training_text(f.raw_text, mode, &diags)) {
        ds.train.push_back({f.path, f.project_id, std::move(*lines)});
      } else {
        ++ds.dropped_invalid;
        ds.warnings.push_back("dropped invalid training file " + f.path.generic_string() +
                              (diags.empty() ? "" : ": " + diags.front().message));
      }
    }
  }
  std::vector<TokenStream> streams;
  for (const auto& f : ds.train) streams.push_back(flatten(f.lines));
  ds.vocab = build_vocab(streams);
  for (std::size_t i = 0; i < ds.train.size(); ++i) ds.train_ids.push_back(vectorize_file(ds.train[i].lines, ds.vocab, i));
  for (std::size_t i = 0; i < ds.test.size(); ++i) ds.test_ids.push_back(vectorize_file(ds.test[i].lines, ds.vocab, i));
  return ds;
}

inline FoldSplit split_for(const std::vector<SourceFile>& files, const TrainConfig& config) {
  FoldSplit s = config.per_project_split ? split_folds_per_project(files, config.fold_count, config.seed)
                                         : split_folds(files, config.fold_count, config.seed);
  s.test_fold = config.test_fold;
  return s;
}

inline std::vector<TrainingExample> make_examples(const std::vector<IdFile>& files, std::size_t n, ContextMode mode,
                                                  bool reset_per_line, std::vector<std::string>* warnings = nullptr) {
  std::vector<TrainingExample> out;
  for (const auto& f : files) {
    auto ex = gen_examples(f, n, mode, reset_per_line, warnings);
    out.insert(out.end(), std::make_move_iterator(ex.begin()), std::make_move_iterator(ex.end()));
  }
  return out;
}

inline std::vector<TrainingExample> make_examples(const std::vector<IdFile>& files, const TrainConfig& config,
                                                  std::vector<std::string>* warnings = nullptr) {
  return make_examples(files, config.n, config.context_mode, config.reset_per_line, warnings);
}

// Initializes a model for the dataset vocabulary and trains it.
inline LanguageModel fit(const Dataset& ds, const TrainConfig& config, std::vector<double>* loss_history = nullptr,
                         const EpochCallback& on_epoch = {}) {
  config.validate();
  const auto examples = make_examples(ds.train_ids, config);
  auto init = ModelParams::glorot(config.cell_kind, {ds.vocab.size(), config.embed_dim, config.hidden_dim}, config.seed,
                                  config.use_bias);
  auto result = train(std::move(init), examples, config, on_epoch);
  if (loss_history) *loss_history = result.loss_history;
  return {std::move(result.params), ds.vocab, config};
}

}  // namespace codegru
