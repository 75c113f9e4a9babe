#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "test_support.hpp"

using namespace codegru;

namespace {

// Returns a fixed probability row per example index, looked up by context[0].
struct TablePredictor {
  std::vector<RowVector> rows;
  RowVector operator()(std::span<const TokenId> ctx) const { return rows.at(static_cast<std::size_t>(ctx[0])); }
};

RowVector uniform_row(std::size_t n) { return RowVector::Constant(static_cast<Eigen::Index>(n), 1.0 / static_cast<double>(n)); }

// A row where `target` sits at 1-based rank `rank` out of `n` ids, no ties.
RowVector row_with_rank(std::size_t n, TokenId target, std::size_t rank) {
  std::vector<TokenId> order;
  for (TokenId i = 0; i < static_cast<TokenId>(n); ++i)
    if (i != target) order.push_back(i);
  order.insert(order.begin() + static_cast<std::ptrdiff_t>(rank - 1), target);
  RowVector r(static_cast<Eigen::Index>(n));
  double total = 0;
  for (std::size_t pos = 0; pos < n; ++pos) total += static_cast<double>(n - pos);
  for (std::size_t pos = 0; pos < n; ++pos) r(order[pos]) = static_cast<double>(n - pos) / total;
  return r;
}

std::vector<TrainingExample> indexed_examples(const std::vector<TokenId>& targets) {
  std::vector<TrainingExample> ex;
  for (std::size_t i = 0; i < targets.size(); ++i) ex.push_back({{static_cast<TokenId>(i)}, targets[i], {}});
  return ex;
}

std::span<const double> span_of(const RowVector& r) { return {r.data(), static_cast<std::size_t>(r.size())}; }

}  // namespace

TEST(Evaluate, PerfectPredictor) {
  TablePredictor p;
  std::vector<TokenId> targets;
  for (TokenId t = 2; t < 8; ++t) {
    RowVector r = RowVector::Zero(8);
    r(t) = 1.0;
    p.rows.push_back(r);
    targets.push_back(t);
  }
  const auto rep = evaluate(p, indexed_examples(targets));
  for (double a : rep.accuracy) EXPECT_DOUBLE_EQ(a, 1.0);
  EXPECT_DOUBLE_EQ(rep.mrr, 1.0);
  EXPECT_NEAR(rep.cross_entropy_bits, 0.0, 1e-12);
}

TEST(Evaluate, UniformTiesFavourSmallestId) {
  TablePredictor p;
  std::vector<TokenId> targets;
  for (TokenId t = 2; t < 10; ++t) {
    p.rows.push_back(uniform_row(10));
    targets.push_back(t);
  }
  const auto rep = evaluate(p, indexed_examples(targets), {1});
  EXPECT_DOUBLE_EQ(rep.accuracy_at(1), 0.0);
  std::vector<TokenId> zero_target{0};
  TablePredictor q{{uniform_row(10)}};
  EXPECT_DOUBLE_EQ(evaluate(q, indexed_examples(zero_target), {1}).accuracy_at(1), 1.0);
  EXPECT_EQ(rank_of(span_of(uniform_row(10)), 4), 5u);
}

TEST(Evaluate, TopKFromKnownRanks) {
  TablePredictor p{{row_with_rank(10, 5, 1), row_with_rank(10, 6, 4), row_with_rank(10, 7, 2)}};
  const auto ex = indexed_examples({5, 6, 7});
  const auto rep = evaluate(p, ex, {1, 3, 5});
  EXPECT_NEAR(rep.accuracy_at(1), 1.0 / 3.0, 1e-12);
  EXPECT_NEAR(rep.accuracy_at(3), 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(rep.accuracy_at(5), 1.0, 1e-12);
  EXPECT_NEAR(top_k_accuracy(p, ex, 3), 2.0 / 3.0, 1e-12);
}

TEST(Evaluate, MrrFromKnownRanks) {
  TablePredictor p{{row_with_rank(10, 5, 1), row_with_rank(10, 6, 2), row_with_rank(10, 7, 4)}};
  EXPECT_NEAR(mrr(p, indexed_examples({5, 6, 7})), 0.58333333333, 1e-9);
}

TEST(Evaluate, UniformCrossEntropyIsLogV) {
  TablePredictor p{{uniform_row(1024), uniform_row(1024)}};
  EXPECT_NEAR(cross_entropy(p, indexed_examples({3, 900})), 10.0, 1e-12);
}

TEST(Evaluate, CrossEntropyHandComputed) {
  const std::vector<double> pt{0.5, 0.25, 0.125, 0.8, 0.1};
  TablePredictor p;
  std::vector<TokenId> targets;
  for (double x : pt) {
    RowVector r = RowVector::Constant(4, (1.0 - x) / 3.0);
    r(2) = x;
    p.rows.push_back(r);
    targets.push_back(2);
  }
  double expect = 0;
  for (double x : pt) expect -= std::log2(x);
  expect /= 5.0;
  EXPECT_NEAR(cross_entropy(p, indexed_examples(targets)), expect, 1e-12);
}

TEST(Evaluate, UnknownTargetIsAMiss) {
  RowVector r = RowVector::Zero(5);
  r(unk_id) = 1.0;
  const auto s = score_prediction(span_of(r), unk_id);
  EXPECT_EQ(s.rank, 0u);
  TablePredictor p{{r}};
  const auto rep = evaluate(p, indexed_examples({unk_id}), {1, 5});
  EXPECT_DOUBLE_EQ(rep.accuracy_at(5), 0.0);
  EXPECT_DOUBLE_EQ(rep.mrr, 0.0);
}

TEST(Evaluate, EmptySetThrows) {
  TablePredictor p;
  EXPECT_THROW(evaluate(p, std::vector<TrainingExample>{}), EvaluationError);
  EXPECT_THROW(summarize(std::vector<ScoredExample>{}), EvaluationError);
}

TEST(Evaluate, ReportMissingKThrows) {
  TablePredictor p{{uniform_row(4)}};
  const auto rep = evaluate(p, indexed_examples({2}), {1});
  EXPECT_THROW(rep.accuracy_at(7), EvaluationError);
}

TEST(Evaluate, ModelPredictorMatchesPredict) {
  const auto params = ModelParams::glorot(CellKind::gru, {12, 4, 5}, 3);
  std::vector<TrainingExample> ex{{{2, 3, 4}, 5, {}}, {{7}, 8, {}}};
  const auto rep = evaluate_model(params, ex);
  double ce = 0;
  for (const auto& e : ex) ce += loss(predict(params, e.context), e.target);
  EXPECT_NEAR(rep.cross_entropy_bits, ce / 2.0, 1e-12);
  EXPECT_EQ(rep.example_count, 2u);
}

// Independent oracle: sort ids by (prob desc, id asc) and look the target up.
TEST(EvaluateProperty, RankAgreesWithSortOracle) {
  Rng rng(77);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t v = 3 + rng.below(40);
    std::vector<double> probs(v);
    for (auto& x : probs) x = static_cast<double>(rng.below(6)) / 10.0;  // plenty of ties
    std::vector<std::size_t> order(v);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) {
      if (probs[a] != probs[b]) return probs[a] > probs[b];
      return a < b;
    });
    for (std::size_t t = 0; t < v; ++t) {
      const auto pos = std::find(order.begin(), order.end(), t) - order.begin();
      EXPECT_EQ(rank_of(probs, static_cast<TokenId>(t)), static_cast<std::size_t>(pos) + 1);
    }
  }
}

TEST(EvaluateProperty, MonotoneInKAndMrrBounds) {
  Rng rng(78);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t v = 4 + rng.below(30);
    const std::size_t m = 1 + rng.below(40);
    TablePredictor p;
    std::vector<TokenId> targets;
    for (std::size_t i = 0; i < m; ++i) {
      RowVector r(static_cast<Eigen::Index>(v));
      for (Eigen::Index j = 0; j < r.size(); ++j) r(j) = 0.01 + rng.uniform();
      r /= r.sum();
      p.rows.push_back(r);
      targets.push_back(static_cast<TokenId>(rng.below(v)));
    }
    const auto rep = evaluate(p, indexed_examples(targets), {10, 1, 5, 3});
    ASSERT_EQ(rep.ks, (std::vector<std::size_t>{1, 3, 5, 10}));
    for (std::size_t i = 1; i < rep.accuracy.size(); ++i) EXPECT_LE(rep.accuracy[i - 1], rep.accuracy[i]);
    for (double a : rep.accuracy) {
      EXPECT_GE(a, 0.0);
      EXPECT_LE(a, 1.0);
    }
    EXPECT_GE(rep.mrr, rep.accuracy_at(1) - 1e-15);
    EXPECT_LE(rep.mrr, 1.0);
    EXPECT_GE(rep.cross_entropy_bits, 0.0);
  }
}

TEST(Report, CompareTableKeepsInputOrder) {
  EvalReport a{"zeta", "variable", {1, 3}, {0.2, 0.4}, 0.3, 4.5, 10};
  EvalReport b{"alpha", "fixed", {1, 3}, {0.1, 0.3}, 0.2, 5.5, 10};
  const std::vector<EvalReport> reps{a, b};
  const auto table = compare_report(reps);
  EXPECT_NE(table.find("acc@1"), std::string::npos);
  EXPECT_NE(table.find("acc@3"), std::string::npos);
  EXPECT_LT(table.find("zeta"), table.find("alpha"));
  EXPECT_EQ(std::count(table.begin(), table.end(), '\n'), 3);
  EXPECT_EQ(compare_report({}), "");
}

TEST(Report, ExportParseRoundTrip) {
  EvalReport a{"codegru", "variable", {1, 3, 5, 10}, {0.25, 0.5, 0.625, 0.75}, 0.4375, 3.25, 128};
  EvalReport b{"baseline", "fixed", {1, 10}, {0.125, 0.5}, 0.25, 6.0, 64};
  const std::vector<EvalReport> reps{a, b};
  EXPECT_EQ(parse_reports(export_reports(reps)), reps);
  EXPECT_THROW(parse_reports("{not json"), FormatError);
}
