#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace codegru;

namespace {

using Lines = std::vector<std::string>;

std::vector<std::string> token_texts(std::string_view text) {
  std::vector<std::string> out;
  for (const auto& t : lex(text)) out.push_back(t.text);
  return out;
}

// Independent depth check: count braces on a clean line sequence and
// compare each line's leading spaces with 4 x depth.
void expect_canonical_indent(const CleanFile& f) {
  int depth = 0;
  for (const auto& line : f.lines) {
    ASSERT_FALSE(line.empty());
    ASSERT_NE(line.find_first_not_of(" \t"), std::string::npos) << "blank line";
    const auto toks = lex(line);
    const int expected = std::max(0, depth - (toks.front().is_sep("}") ? 1 : 0));
    const auto lead = line.find_first_not_of(' ');
    EXPECT_EQ(lead, static_cast<std::size_t>(expected) * 4) << line;
    for (const auto& t : toks) {
      if (t.is_sep("{")) ++depth;
      if (t.is_sep("}")) --depth;
    }
  }
  EXPECT_EQ(depth, 0);
}

}  // namespace

TEST(StripComments, LineComment) { EXPECT_EQ(strip_comments("int i = 0; // counter").text, "int i = 0; "); }

TEST(StripComments, LiteralsProtected) {
  EXPECT_EQ(strip_comments(R"(String s = "a//b";)").text, R"(String s = "a//b";)");
  EXPECT_EQ(strip_comments(R"(String s = "/* no */"; char c = '/';)").text, R"(String s = "/* no */"; char c = '/';)");
  EXPECT_EQ(strip_comments(R"(s = "q\"//x"; // gone)").text, R"(s = "q\"//x"; )");
}

TEST(StripComments, TwoBlockSpans) { EXPECT_EQ(strip_comments("/* a */ x /* b */ y").text, " x  y"); }

TEST(StripComments, JavadocAndLineStructure) {
  const auto out = strip_comments("/**\n * doc\n */\nint a; /* x\n y */ int b;\n");
  EXPECT_EQ(out.text, "\n\n\nint a; \n int b;\n");
  EXPECT_TRUE(out.diagnostics.empty());
}

TEST(StripComments, UnterminatedBlockTruncatesAndFlags) {
  const auto out = strip_comments("int a;\nint b; /* never closed\nint c;");
  EXPECT_EQ(out.text, "int a;\nint b; ");
  ASSERT_EQ(out.diagnostics.size(), 1u);
  EXPECT_EQ(out.diagnostics[0].line, 2u);
  EXPECT_NE(out.diagnostics[0].message.find("unterminated block comment"), std::string::npos);
}

TEST(Validate, Examples) {
  EXPECT_TRUE(validate("class A { }").ok);
  const auto bad = validate("if (x { }");
  EXPECT_FALSE(bad.ok);
  ASSERT_FALSE(bad.diagnostics.empty());
  EXPECT_EQ(bad.diagnostics[0].message, "unbalanced ( at line 1");
  EXPECT_TRUE(validate("int i = 0; while(i<10){ i++; }").ok);
}

TEST(Validate, NestingAndLexErrors) {
  EXPECT_FALSE(validate("a[(]);").ok);
  EXPECT_FALSE(validate("}").ok);
  EXPECT_FALSE(validate("int x = 3 # 4;").ok);
  EXPECT_TRUE(validate("s = \"(((\";").ok);
  const auto r = validate("void f() {\n  int a;\n");
  ASSERT_FALSE(r.ok);
  EXPECT_EQ(r.diagnostics[0].line, 1u);
}

TEST(Normalize, ObfuscatedBlock) {
  EXPECT_EQ(normalize_structure("int i=0;while(i<10){i++;}").lines,
            (Lines{"int i=0;", "while(i<10){", "    i++;", "}"}));
}

TEST(Normalize, ForHeaderStaysIntact) {
  EXPECT_EQ(normalize_structure("for(int i=0;i<n;i++){x();}").lines, (Lines{"for(int i=0;i<n;i++){", "    x();", "}"}));
}

TEST(Normalize, AlreadyNormalizedUnchanged) {
  const Lines expected{"class A {", "    void f() {", "        int x = 1;", "    }", "}"};
  std::string text;
  for (const auto& l : expected) text += l + "\n";
  EXPECT_EQ(normalize_structure(text).lines, expected);
}

TEST(Normalize, ReindentsAndDropsBlankLines) {
  EXPECT_EQ(normalize_structure("class A {\n\n\n      int x;   \n\t}\n").lines, (Lines{"class A {", "    int x;", "}"}));
}

TEST(Normalize, ClosingBraceFollowers) {
  EXPECT_EQ(normalize_structure("if(a){b();}else{c();}").lines, (Lines{"if(a){", "    b();", "}else{", "    c();", "}"}));
  EXPECT_EQ(normalize_structure("try{a();}catch(Exception e){b();}finally{c();}").lines,
            (Lines{"try{", "    a();", "}catch(Exception e){", "    b();", "}finally{", "    c();", "}"}));
  EXPECT_EQ(normalize_structure("do{i++;}while(i<3);x();").lines, (Lines{"do{", "    i++;", "}while(i<3);", "x();"}));
  EXPECT_EQ(normalize_structure("int[] a={1,2};").lines, (Lines{"int[] a={", "    1,2};"}));
}

TEST(Normalize, InvalidInputThrows) { EXPECT_THROW(normalize_structure("if (x {"), ValidityError); }

TEST(SampleFile, FullPass) {
  CleanFile out;
  const auto report = sample_file("// header\nclass A {/* x */int a=1;}\n", "A.java", out);
  ASSERT_TRUE(report.ok);
  EXPECT_EQ(out.lines, (Lines{"class A {", "    int a=1;", "}"}));
  EXPECT_EQ(out.origin_path, "A.java");
  CleanFile dropped;
  EXPECT_FALSE(sample_file("class A { /* open", "B.java", dropped).ok);
  EXPECT_TRUE(dropped.lines.empty());
}

TEST(SampleFile, CleanFileHasNoComments) {
  CleanFile out;
  ASSERT_TRUE(sample_file("class A { // c1\n /* c2 */ String s = \"// kept\"; }\n", {}, out).ok);
  for (const auto& l : out.lines) {
    const auto stripped = strip_comments(l);
    EXPECT_EQ(stripped.text, l);
  }
  EXPECT_NE(out.text().find("\"// kept\""), std::string::npos);
}

// Idempotence, token preservation and canonical indentation over random
// well-bracketed fixtures.
TEST(NormalizeProperty, IdempotentAndTokenPreserving) {
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    testing_support::BlockFixture gen(seed * 7919 + 1);
    const auto text = gen.render(gen.tokens());
    ASSERT_TRUE(validate(text).ok) << text;
    const auto once = normalize_structure(text);
    const auto twice = normalize_structure(once.text());
    ASSERT_EQ(once.lines, twice.lines) << text;
    ASSERT_EQ(token_texts(text), token_texts(once.text())) << text;
    expect_canonical_indent(once);
  }
}

// Comment stripping leaves literal contents untouched.
TEST(StripCommentsProperty, LiteralsSurvive) {
  Rng rng(77);
  const std::vector<std::string> pieces = {"//", "/*", "*/", "a", " ", "x;", "\\\"", "'"};
  for (int trial = 0; trial < 300; ++trial) {
    std::string body;
    const auto n = rng.below(8);
    for (std::uint64_t i = 0; i < n; ++i) {
      auto p = testing_support::pick(rng, pieces);
      if (p == "'") p = "\\'";
      body += p;
    }
    const std::string lit = "\"" + body + "\"";
    const std::string src = "s = " + lit + "; /* c */ t = 1; // tail";
    const auto out = strip_comments(src).text;
    EXPECT_EQ(out, "s = " + lit + ";  t = 1; ") << src;
  }
}
