#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "test_support.hpp"

using namespace codegru;
using testing_support::TempDir;
using testing_support::write_file;

namespace {

std::vector<SourceFile> fake_files(std::size_t n, std::size_t projects = 1) {
  std::vector<SourceFile> files;
  for (std::size_t i = 0; i < n; ++i) {
    const std::string project = "p" + std::to_string(i % projects);
    files.push_back({project + "/F" + std::to_string(i) + ".java", project, "class F {}"});
  }
  return files;
}

}  // namespace

TEST(ScanCorpus, EmptyDirectoryYieldsNothing) {
  TempDir dir;
  const auto listing = scan_corpus(dir.path(), ".java");
  EXPECT_TRUE(listing.files.empty());
  EXPECT_TRUE(listing.warnings.empty());
}

TEST(ScanCorpus, FiltersByExtensionAndLabelsProjects) {
  TempDir dir;
  write_file(dir / "a/X.java", "class X {}");
  write_file(dir / "a/Y.txt", "not java");
  write_file(dir / "b/Z.java", "class Z {}");
  const auto listing = scan_corpus(dir.path(), ".java");
  ASSERT_EQ(listing.files.size(), 2u);
  EXPECT_EQ(listing.files[0].path, dir / "a/X.java");
  EXPECT_EQ(listing.files[0].project_id, "a");
  EXPECT_EQ(listing.files[0].raw_text, "class X {}");
  EXPECT_EQ(listing.files[1].path, dir / "b/Z.java");
  EXPECT_EQ(listing.files[1].project_id, "b");
}

TEST(ScanCorpus, NestedFilesBelongToTopLevelProject) {
  TempDir dir;
  write_file(dir / "a/sub/Q.java", "class Q {}");
  const auto listing = scan_corpus(dir.path(), ".java");
  ASSERT_EQ(listing.files.size(), 1u);
  EXPECT_EQ(listing.files[0].project_id, "a");
}

TEST(ScanCorpus, SortedOrderAndRawBytesKept) {
  TempDir dir;
  const std::string text = "class B {\r\n  // keep\t \r\n}\n";
  write_file(dir / "z/B.java", text);
  write_file(dir / "a/A.java", "class A {}");
  write_file(dir / "m/deep/er/C.java", "class C {}");
  const auto listing = scan_corpus(dir.path(), ".java");
  ASSERT_EQ(listing.files.size(), 3u);
  EXPECT_EQ(listing.files[0].project_id, "a");
  EXPECT_EQ(listing.files[1].project_id, "m");
  EXPECT_EQ(listing.files[2].project_id, "z");
  EXPECT_EQ(listing.files[2].raw_text, text);
}

TEST(ScanCorpus, SkipsNonUtf8WithWarning) {
  TempDir dir;
  write_file(dir / "a/Good.java", "class G {}");
  write_file(dir / "a/Bad.java", std::string("class \xff\xfe {}"));
  const auto listing = scan_corpus(dir.path(), ".java");
  ASSERT_EQ(listing.files.size(), 1u);
  EXPECT_EQ(listing.files[0].path.filename(), "Good.java");
  ASSERT_EQ(listing.warnings.size(), 1u);
  EXPECT_NE(listing.warnings[0].find("Bad.java"), std::string::npos);
}

TEST(ScanCorpus, MissingRootIsCorpusError) {
  TempDir dir;
  EXPECT_THROW(scan_corpus(dir / "nope", ".java"), CorpusError);
}

TEST(Utf8, AcceptsMultibyteRejectsMalformed) {
  EXPECT_TRUE(is_valid_utf8("plain"));
  EXPECT_TRUE(is_valid_utf8("caf\xc3\xa9 \xe2\x82\xac \xf0\x9f\x98\x80"));
  EXPECT_FALSE(is_valid_utf8("\xc3"));
  EXPECT_FALSE(is_valid_utf8("\xe2\x82"));
  EXPECT_FALSE(is_valid_utf8("\x80"));
  EXPECT_FALSE(is_valid_utf8("\xc0\xaf"));
  EXPECT_FALSE(is_valid_utf8("\xed\xa0\x80"));
}

TEST(SplitFolds, TenFilesTenFoldsOneEach) {
  const auto split = split_folds(fake_files(10), 10, 3);
  for (auto s : split.fold_sizes()) EXPECT_EQ(s, 1u);
}

TEST(SplitFolds, TwentyThreeFilesSizes) {
  const auto split = split_folds(fake_files(23), 10, 3);
  auto sizes = split.fold_sizes();
  std::sort(sizes.begin(), sizes.end(), std::greater<>());
  EXPECT_EQ(sizes, (std::vector<std::size_t>{3, 3, 3, 2, 2, 2, 2, 2, 2, 2}));
}

TEST(SplitFolds, DeterministicForSeed) {
  const auto files = fake_files(37);
  EXPECT_EQ(split_folds(files, 10, 11).assignment, split_folds(files, 10, 11).assignment);
  EXPECT_EQ(split_folds_per_project(files, 10, 11).assignment, split_folds_per_project(files, 10, 11).assignment);
  EXPECT_NE(split_folds(files, 10, 11).assignment, split_folds(files, 10, 12).assignment);
}

TEST(SplitFolds, Errors) {
  EXPECT_THROW(split_folds(fake_files(5), 10, 0), SplitError);
  EXPECT_THROW(split_folds(fake_files(5), 1, 0), SplitError);
  EXPECT_THROW(split_folds({}, 2, 0), SplitError);
}

TEST(SplitFolds, TestFoldDefaultsToZero) {
  const auto files = fake_files(20);
  const auto split = split_folds(files, 10, 5);
  EXPECT_EQ(split.test_fold, 0);
  std::size_t tests = 0;
  for (const auto& f : files) tests += split.is_test(f.path);
  EXPECT_EQ(tests, split.fold_sizes()[0]);
}

// Partition and balance hold for random sizes, fold counts and project mixes.
TEST(SplitFoldsProperty, PartitionAndBalance) {
  Rng rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const int k = 2 + static_cast<int>(rng.below(11));
    const std::size_t n = static_cast<std::size_t>(k) + rng.below(60);
    const std::size_t projects = 1 + rng.below(6);
    const auto files = fake_files(n, projects);
    for (bool per_project : {false, true}) {
      const auto split = per_project ? split_folds_per_project(files, k, rng.next()) : split_folds(files, k, rng.next());
      ASSERT_EQ(split.assignment.size(), n);
      std::set<std::string> seen;
      for (const auto& f : files) {
        const int fold = split.fold_of(f.path);
        ASSERT_GE(fold, 0);
        ASSERT_LT(fold, k);
        seen.insert(f.path.generic_string());
      }
      EXPECT_EQ(seen.size(), n);
      const auto sizes = split.fold_sizes();
      std::size_t total = 0;
      for (auto s : sizes) total += s;
      EXPECT_EQ(total, n);
      const auto [lo, hi] = std::minmax_element(sizes.begin(), sizes.end());
      EXPECT_LE(*hi - *lo, 1u) << "k=" << k << " n=" << n << " per_project=" << per_project;
    }
  }
}

TEST(SplitFolds, PerProjectSpreadsEachProject) {
  const auto files = fake_files(40, 2);
  const auto split = split_folds_per_project(files, 10, 9);
  std::map<std::string, std::vector<int>> per;
  for (const auto& f : files) per[f.project_id].push_back(split.fold_of(f.path));
  for (auto& [_, folds] : per) {
    std::map<int, int> counts;
    for (int f : folds) ++counts[f];
    EXPECT_EQ(counts.size(), 10u);
    for (auto& [__, c] : counts) EXPECT_EQ(c, 2);
  }
}

TEST(Manifest, RoundTrip) {
  const auto files = fake_files(12, 3);
  const auto split = split_folds(files, 4, 1);
  std::stringstream ss;
  write_manifest(ss, files, split);
  const auto records = read_manifest(ss);
  ASSERT_EQ(records.size(), files.size());
  for (std::size_t i = 0; i < files.size(); ++i) {
    EXPECT_EQ(records[i].path, files[i].path.generic_string());
    EXPECT_EQ(records[i].project, files[i].project_id);
    EXPECT_EQ(records[i].fold, split.fold_of(files[i].path));
  }
}

TEST(Rng, UniformInRangeAndDeterministic) {
  Rng a(5), b(5);
  for (int i = 0; i < 1000; ++i) {
    const double u = a.uniform();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
    EXPECT_EQ(u, b.uniform());
    EXPECT_LT(a.below(7), 7u);
    b.below(7);
  }
}
