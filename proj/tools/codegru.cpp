// Command-line front end: corpus ingestion, preprocessing, training,
// evaluation and the suggestion / generation surfaces.
//
// Exit codes: 0 success, 1 usage error, 2 data/format error,
// 3 divergence/numeric error.

#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "codegru/codegru.hpp"

namespace {

using namespace codegru;

constexpr int exit_ok = 0;
constexpr int exit_usage = 1;
constexpr int exit_data = 2;
constexpr int exit_numeric = 3;

struct GlobalOptions {
  std::optional<std::string> config_file;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> models;
};

struct TrainFlags {
  std::string corpus;
  std::string out;
  std::optional<std::string> mode, cell, tokens;
  std::optional<std::size_t> n, batch, epochs, embed, hidden;
  std::optional<double> lr, dropout;
  std::optional<int> fold, folds;
  bool reset_per_line = false;
  bool no_bias = false;
  bool global_split = false;
  std::string ext = ".java";
  std::optional<std::string> loss_history;
};

TrainConfig base_config(const GlobalOptions& g) {
  TrainConfig c;
  if (g.config_file) {
    std::ifstream in(*g.config_file);
    if (!in) throw ConfigError("cannot read config file " + *g.config_file);
    c = parse_config(in, c);
  }
  if (g.seed) c.seed = *g.seed;
  return c;
}

std::string read_all(std::istream& in) { return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()}; }

std::string code_argument(const std::vector<std::string>& words) {
  if (words.empty()) return read_all(std::cin);
  std::string s;
  for (const auto& w : words) {
    if (!s.empty()) s += ' ';
    s += w;
  }
  return s;
}

const std::string& single_model(const GlobalOptions& g) {
  if (g.models.size() != 1) throw ConfigError("exactly one --model is required");
  return g.models.front();
}

int run_ingest(const std::string& corpus, const std::string& ext, int folds, bool global_split,
               const std::optional<std::string>& manifest, const GlobalOptions& g) {
  const auto cfg = base_config(g);
  const auto listing = scan_corpus(corpus, ext);
  for (const auto& w : listing.warnings) std::cerr << "warning: " << w << '\n';
  const auto split = global_split ? split_folds(listing.files, folds, cfg.seed)
                                  : split_folds_per_project(listing.files, folds, cfg.seed);
  if (manifest) {
    std::ofstream out(*manifest);
    if (!out) throw CorpusError("cannot write manifest " + *manifest);
    write_manifest(out, listing.files, split);
  } else {
    write_manifest(std::cout, listing.files, split);
  }
  std::cerr << listing.files.size() << " files, fold sizes:";
  for (auto s : split.fold_sizes()) std::cerr << ' ' << s;
  std::cerr << '\n';
  return exit_ok;
}

std::vector<std::filesystem::path> expand_inputs(const std::vector<std::string>& inputs, const std::string& ext) {
  std::vector<std::filesystem::path> out;
  for (const auto& in : inputs) {
    if (std::filesystem::is_directory(in)) {
      for (auto& f : scan_corpus(in, ext).files) out.push_back(f.path);
    } else {
      out.emplace_back(in);
    }
  }
  return out;
}

int run_preprocess(const std::vector<std::string>& inputs, const std::string& ext) {
  std::size_t kept = 0, dropped = 0;
  for (const auto& path : expand_inputs(inputs, ext)) {
    CleanFile clean;
    const auto report = sample_file(read_file(path), path, clean);
    if (!report.ok) {
      ++dropped;
      for (const auto& d : report.diagnostics) std::cerr << path.generic_string() << ":" << d.line << ": " << d.message << '\n';
      continue;
    }
    auto out_path = path;
    out_path += ".clean";
    std::ofstream out(out_path);
    if (!out) throw CorpusError("cannot write " + out_path.string());
    out << clean.text();
    ++kept;
  }
  std::cerr << kept << " normalized, " << dropped << " dropped as invalid\n";
  return dropped > 0 && kept == 0 ? exit_data : exit_ok;
}

int run_regularize(const std::vector<std::string>& inputs, const std::optional<std::string>& out_file, bool raw) {
  std::ofstream file;
  if (out_file) {
    file.open(*out_file);
    if (!file) throw CorpusError("cannot write " + *out_file);
  }
  std::ostream& out = out_file ? static_cast<std::ostream&>(file) : std::cout;
  auto emit = [&](const std::string& text) {
    for (const auto& line : token_lines(text, raw ? TokenMode::raw : TokenMode::regularized)) out << join_tokens(line) << '\n';
  };
  if (inputs.empty()) {
    emit(read_all(std::cin));
  } else {
    for (const auto& p : inputs) emit(read_file(p));
  }
  return exit_ok;
}

int run_vocab(const std::string& corpus, const std::string& ext, const std::optional<std::string>& out_file,
              bool all_folds, const GlobalOptions& g) {
  const auto cfg = base_config(g);
  const auto listing = scan_corpus(corpus, ext);
  std::vector<TokenStream> raw, reg;
  std::optional<FoldSplit> split;
  if (!all_folds) split = split_for(listing.files, cfg);
  std::size_t dropped = 0;
  for (const auto& f : listing.files) {
    if (split && split->is_test(f.path)) continue;
    auto r = prepare_training_text(f.raw_text, TokenMode::raw);
    auto e = prepare_training_text(f.raw_text, TokenMode::regularized);
    if (!r || !e) {
      ++dropped;
      continue;
    }
    raw.push_back(flatten(*r));
    reg.push_back(flatten(*e));
  }
  const auto vocab = build_vocab(reg);
  if (out_file) {
    std::ofstream out(*out_file);
    if (!out) throw CorpusError("cannot write " + *out_file);
    write_vocab(out, vocab);
  }
  if (vocab.only_reserved()) std::cerr << "warning: vocabulary contains only reserved ids\n";
  const auto stats = vocab_stats(raw, reg);
  char pct[32];
  std::snprintf(pct, sizeof pct, "%.2f", stats.percent_decrease);
  std::cout << "files " << raw.size() << " (dropped " << dropped << ")\n"
            << "V_Norm " << stats.v_norm << "\nV_CodeGRU " << stats.v_codegru << "\ndecrease " << pct << "%\n";
  return exit_ok;
}

TrainConfig train_config(const TrainFlags& f, const GlobalOptions& g) {
  TrainConfig c = base_config(g);
  if (f.mode) c.context_mode = parse_context_mode(*f.mode);
  if (f.cell) c.cell_kind = parse_cell_kind(*f.cell);
  if (f.tokens) c.tokens = parse_token_mode(*f.tokens);
  if (f.n) c.n = *f.n;
  if (f.batch) c.batch_size = *f.batch;
  if (f.epochs) c.epochs = *f.epochs;
  if (f.embed) c.embed_dim = *f.embed;
  if (f.hidden) c.hidden_dim = *f.hidden;
  if (f.lr) c.learning_rate = *f.lr;
  if (f.dropout) c.dropout_rate = *f.dropout;
  if (f.fold) c.test_fold = *f.fold;
  if (f.folds) c.fold_count = *f.folds;
  if (f.reset_per_line) c.reset_per_line = true;
  if (f.no_bias) c.use_bias = false;
  if (f.global_split) c.per_project_split = false;
  c.validate();
  return c;
}

int run_train(const TrainFlags& f, const GlobalOptions& g) {
  const auto cfg = train_config(f, g);
  const auto listing = scan_corpus(f.corpus, f.ext);
  const auto split = split_for(listing.files, cfg);
  const auto ds = prepare_dataset(listing, split, cfg.tokens);
  for (const auto& w : ds.warnings) std::cerr << "warning: " << w << '\n';
  std::cerr << "training on " << ds.train.size() << " files, vocabulary " << ds.vocab.size() << '\n';

  std::vector<double> history;
  const auto model = fit(ds, cfg, &history, [](std::size_t epoch, double loss) {
    std::cerr << "epoch " << epoch << " loss " << loss << '\n';
  });
  save_model(model, f.out);
  if (f.loss_history) {
    std::ofstream out(*f.loss_history);
    if (!out) throw CorpusError("cannot write " + *f.loss_history);
    write_loss_history(out, history);
  }
  std::cerr << "saved " << f.out << '\n';
  return exit_ok;
}

int run_evaluate(const std::string& corpus, const std::string& ext, std::optional<int> fold,
                 const std::optional<std::string>& mode, const std::optional<std::string>& report_file,
                 const std::vector<std::size_t>& ks, const GlobalOptions& g) {
  if (g.models.empty()) throw ConfigError("evaluate needs at least one --model");
  const auto listing = scan_corpus(corpus, ext);
  std::vector<EvalReport> reports;
  for (const auto& path : g.models) {
    const auto model = load_model(path);
    TrainConfig cfg = model.config;
    if (fold) cfg.test_fold = *fold;
    if (mode) cfg.context_mode = parse_context_mode(*mode);
    cfg.validate();
    const auto split = split_for(listing.files, cfg);
    auto ds = prepare_dataset(listing, split, cfg.tokens);
    // The test side is encoded with the model's own vocabulary.
    std::vector<IdFile> test_ids;
    for (std::size_t i = 0; i < ds.test.size(); ++i) test_ids.push_back(vectorize_file(ds.test[i].lines, model.vocab, i));
    const auto examples = make_examples(test_ids, cfg);
    auto report = evaluate_model(model.params, examples, ks);
    report.model = std::filesystem::path(path).filename().string() + " (" + to_string(cfg.cell_kind) + ", " +
                   to_string(cfg.tokens) + ")";
    report.context_mode = to_string(cfg.context_mode);
    reports.push_back(std::move(report));
  }
  std::cout << compare_report(reports);
  const std::string export_path = report_file ? *report_file : "evaluation.json";
  std::ofstream out(export_path);
  if (!out) throw CorpusError("cannot write " + export_path);
  out << export_reports(reports) << '\n';
  return exit_ok;
}

int run_suggest(const std::vector<std::string>& code, std::size_t k, const GlobalOptions& g) {
  const auto model = load_model(single_model(g));
  print_suggestions(std::cout, suggest(model, code_argument(code), k));
  return exit_ok;
}

int run_generate(const std::vector<std::string>& code, std::size_t max_steps, const GlobalOptions& g) {
  const auto model = load_model(single_model(g));
  print_generation(std::cout, generate(model, code_argument(code), max_steps));
  return exit_ok;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const DivergenceError*>(&e)) return exit_numeric;
  if (dynamic_cast<const ConfigError*>(&e)) return exit_usage;
  return exit_data;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"codegru: source-code language modeling toolkit"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--config", g.config_file, "key=value file with training settings");
  app.add_option("--seed", g.seed, "random seed (overrides the config file)");
  app.add_option("--model", g.models, "model file (repeatable for evaluate)");

  std::string corpus;
  std::string ext = ".java";

  auto* ingest = app.add_subcommand("ingest", "scan a corpus and assign files to folds");
  int folds = 10;
  bool global_split = false;
  std::optional<std::string> manifest;
  ingest->add_option("--corpus", corpus, "corpus root")->required();
  ingest->add_option("--ext", ext, "file extension");
  ingest->add_option("--folds", folds, "fold count");
  ingest->add_flag("--global-split", global_split, "shuffle across projects instead of per project");
  ingest->add_option("--manifest", manifest, "write the JSON Lines manifest here (default stdout)");

  auto* preprocess = app.add_subcommand("preprocess", "strip, validate and normalize files into <file>.clean");
  std::vector<std::string> inputs;
  preprocess->add_option("inputs", inputs, "files or directories")->required();
  preprocess->add_option("--ext", ext, "file extension when scanning directories");

  auto* regularize_cmd = app.add_subcommand("regularize", "print the regularized token stream, one line per source line");
  std::vector<std::string> reg_inputs;
  std::optional<std::string> reg_out;
  bool raw_tokens = false;
  regularize_cmd->add_option("inputs", reg_inputs, "clean files (default stdin)");
  regularize_cmd->add_option("--out", reg_out, "output file (default stdout)");
  regularize_cmd->add_flag("--raw", raw_tokens, "emit lowercased raw tokens instead");

  auto* vocab_cmd = app.add_subcommand("vocab", "vocabulary statistics with and without regularization");
  std::optional<std::string> vocab_out;
  bool all_folds = false;
  vocab_cmd->add_option("--corpus", corpus, "corpus root")->required();
  vocab_cmd->add_option("--ext", ext, "file extension");
  vocab_cmd->add_option("--out", vocab_out, "write the regularized vocabulary (one token per line)");
  vocab_cmd->add_flag("--all-folds", all_folds, "include the test fold");

  auto* train_cmd = app.add_subcommand("train", "train a model on the training folds of a corpus");
  TrainFlags tf;
  train_cmd->add_option("--corpus", tf.corpus, "corpus root")->required();
  train_cmd->add_option("--out", tf.out, "model output file")->required();
  train_cmd->add_option("--mode", tf.mode, "variable|fixed");
  train_cmd->add_option("--cell", tf.cell, "rnn|gru");
  train_cmd->add_option("--tokens", tf.tokens, "regularized|raw");
  train_cmd->add_option("--n", tf.n, "context upper bound");
  train_cmd->add_option("--batch", tf.batch, "batch size");
  train_cmd->add_option("--epochs", tf.epochs, "epochs");
  train_cmd->add_option("--lr", tf.lr, "Adam learning rate");
  train_cmd->add_option("--dropout", tf.dropout, "dropout rate");
  train_cmd->add_option("--embed", tf.embed, "embedding width");
  train_cmd->add_option("--hidden", tf.hidden, "hidden width");
  train_cmd->add_option("--fold", tf.fold, "held-out test fold");
  train_cmd->add_option("--folds", tf.folds, "fold count");
  train_cmd->add_option("--ext", tf.ext, "file extension");
  train_cmd->add_flag("--reset-per-line", tf.reset_per_line, "restart the context at every line");
  train_cmd->add_flag("--no-bias", tf.no_bias, "bias-free affine maps");
  train_cmd->add_flag("--global-split", tf.global_split, "shuffle across projects instead of per project");
  train_cmd->add_option("--loss-history", tf.loss_history, "write 'epoch loss' lines here");

  auto* eval_cmd = app.add_subcommand("evaluate", "top-k accuracy, MRR and cross-entropy on the held-out fold");
  std::optional<int> eval_fold;
  std::optional<std::string> eval_mode, eval_report;
  std::vector<std::size_t> ks = default_ks;
  eval_cmd->add_option("--corpus", corpus, "corpus root")->required();
  eval_cmd->add_option("--ext", ext, "file extension");
  eval_cmd->add_option("--fold", eval_fold, "test fold (default: the one the model was trained against)");
  eval_cmd->add_option("--mode", eval_mode, "variable|fixed (default: the model's training mode)");
  eval_cmd->add_option("--report", eval_report, "JSON export path (default evaluation.json)");
  eval_cmd->add_option("--ks", ks, "accuracy cutoffs")->delimiter(',');

  auto* suggest_cmd = app.add_subcommand("suggest", "rank next-token suggestions for a code snippet");
  std::vector<std::string> code;
  std::size_t k = 5;
  suggest_cmd->add_option("code", code, "code context (default stdin)");
  suggest_cmd->add_option("--k", k, "number of suggestions");

  auto* generate_cmd = app.add_subcommand("generate", "greedily complete the current statement");
  std::size_t max_steps = 20;
  generate_cmd->add_option("code", code, "code context (default stdin)");
  generate_cmd->add_option("--max-steps", max_steps, "token budget");

  auto* repl_cmd = app.add_subcommand("repl", "interactive suggestion session");
  repl_cmd->add_option("--k", k, "number of suggestions");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_usage;
  }

  try {
    if (*ingest) return run_ingest(corpus, ext, folds, global_split, manifest, g);
    if (*preprocess) return run_preprocess(inputs, ext);
    if (*regularize_cmd) return run_regularize(reg_inputs, reg_out, raw_tokens);
    if (*vocab_cmd) return run_vocab(corpus, ext, vocab_out, all_folds, g);
    if (*train_cmd) return run_train(tf, g);
    if (*eval_cmd) return run_evaluate(corpus, ext, eval_fold, eval_mode, eval_report, ks, g);
    if (*suggest_cmd) return run_suggest(code, k, g);
    if (*generate_cmd) return run_generate(code, max_steps, g);
    if (*repl_cmd) return repl(load_model(single_model(g)), std::cin, std::cout, k);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
  return exit_usage;
}
