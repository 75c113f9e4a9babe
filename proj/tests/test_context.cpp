#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace codegru;

namespace {

IdFile random_file(Rng& rng, std::size_t tokens) {
  IdFile f;
  std::size_t left = tokens;
  while (left > 0) {
    const auto len = std::min<std::size_t>(left, 1 + rng.below(8));
    std::vector<TokenId> line;
    for (std::size_t i = 0; i < len; ++i) line.push_back(static_cast<TokenId>(2 + rng.below(30)));
    f.lines.push_back(std::move(line));
    left -= len;
  }
  return f;
}

std::vector<TokenId> flat_ids(const IdFile& f) {
  std::vector<TokenId> out;
  for (const auto& l : f.lines) out.insert(out.end(), l.begin(), l.end());
  return out;
}

}  // namespace

TEST(VariableContext, DirectEnumeration) {
  // a b ; c d
  const IdFile f{0, {{2, 3, 4}, {5, 6}}};
  const auto ex = gen_variable_context(f, 20);
  ASSERT_EQ(ex.size(), 4u);
  EXPECT_EQ(ex[0].context, (std::vector<TokenId>{2}));
  EXPECT_EQ(ex[0].target, 3);
  EXPECT_EQ(ex[1].context, (std::vector<TokenId>{2, 3}));
  EXPECT_EQ(ex[1].target, 4);
  EXPECT_EQ(ex[2].context, (std::vector<TokenId>{2, 3, 4}));
  EXPECT_EQ(ex[2].target, 5);
  EXPECT_EQ(ex[2].origin.line, 2u);
  EXPECT_EQ(ex[2].origin.index, 0u);
  EXPECT_EQ(ex[3].context, (std::vector<TokenId>{2, 3, 4, 5}));
  EXPECT_EQ(ex[3].target, 6);
}

TEST(VariableContext, CapsAtN) {
  const std::vector<TokenId> ids{2, 3, 4, 5, 6};
  const auto ex = gen_variable_context(single_line_file(ids), 2);
  std::vector<std::size_t> lens;
  for (const auto& e : ex) lens.push_back(e.context.size());
  EXPECT_EQ(lens, (std::vector<std::size_t>{1, 2, 2, 2}));
}

TEST(VariableContext, HundredTokens) {
  std::vector<TokenId> ids(100, 7);
  const auto ex = gen_variable_context(single_line_file(ids), 20);
  EXPECT_EQ(ex.size(), 99u);
  std::size_t mx = 0;
  for (const auto& e : ex) mx = std::max(mx, e.context.size());
  EXPECT_EQ(mx, 20u);
}

TEST(VariableContext, SingleTokenIsEmpty) {
  const std::vector<TokenId> ids{2};
  EXPECT_TRUE(gen_variable_context(single_line_file(ids), 20).empty());
}

TEST(VariableContext, ResetPerLine) {
  const IdFile f{0, {{2, 3, 4}, {5, 6}}};
  const auto ex = gen_variable_context(f, 20, true);
  ASSERT_EQ(ex.size(), 3u);
  EXPECT_EQ(ex[2].context, (std::vector<TokenId>{5}));
  EXPECT_EQ(ex[2].target, 6);
}

TEST(FixedContext, WindowCounts) {
  const std::vector<TokenId> five{2, 3, 4, 5, 6};
  const auto ex = gen_fixed_context(single_line_file(five), 2);
  ASSERT_EQ(ex.size(), 3u);
  for (const auto& e : ex) EXPECT_EQ(e.context.size(), 2u);
  EXPECT_EQ(ex[0].context, (std::vector<TokenId>{2, 3}));
  EXPECT_EQ(ex[0].target, 4);

  std::vector<TokenId> t21(21, 3);
  EXPECT_EQ(gen_fixed_context(single_line_file(t21), 20).size(), 1u);
}

TEST(FixedContext, ShortStreamWarns) {
  std::vector<std::string> warnings;
  const std::vector<TokenId> ids{2, 3};
  EXPECT_TRUE(gen_fixed_context(single_line_file(ids), 2, &warnings).empty());
  EXPECT_EQ(warnings.size(), 1u);
}

TEST(Context, InvalidBound) {
  const std::vector<TokenId> ids{2, 3};
  EXPECT_THROW(gen_variable_context(single_line_file(ids), 0), ConfigError);
  EXPECT_THROW(gen_fixed_context(single_line_file(ids), 0), ConfigError);
}

// Counts, bounds and target adjacency over random multi-line streams.
TEST(ContextProperty, CountIdentities) {
  Rng rng(17);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t t = 1 + rng.below(120);
    const std::size_t n = 1 + rng.below(25);
    const auto file = random_file(rng, t);
    const auto flat = flat_ids(file);
    const auto var = gen_variable_context(file, n);
    const auto fix = gen_fixed_context(file, n);
    ASSERT_EQ(var.size(), t - 1);
    ASSERT_EQ(fix.size(), t > n ? t - n : 0);
    if (t > n) {
      EXPECT_EQ(var.size() - fix.size(), n - 1);
    }
    for (std::size_t i = 0; i < var.size(); ++i) {
      const auto& e = var[i];
      ASSERT_GE(e.context.size(), 1u);
      ASSERT_LE(e.context.size(), n);
      const std::size_t p = i + 1;
      EXPECT_EQ(e.target, flat[p]);
      const std::vector<TokenId> expect(flat.begin() + static_cast<std::ptrdiff_t>(p - e.context.size()),
                                        flat.begin() + static_cast<std::ptrdiff_t>(p));
      EXPECT_EQ(e.context, expect);
    }
    for (std::size_t i = 0; i < fix.size(); ++i) {
      ASSERT_EQ(fix[i].context.size(), n);
      EXPECT_EQ(fix[i].target, flat[n + i]);
    }
  }
}
