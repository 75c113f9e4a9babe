#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "codegru/errors.hpp"
#include "codegru/rng.hpp"

namespace codegru {

namespace fs = std::filesystem;

struct SourceFile {
  fs::path path;
  std::string project_id;
  std::string raw_text;
};

struct CorpusListing {
  std::vector<SourceFile> files;
  std::vector<std::string> warnings;
};

struct FoldSplit {
  int fold_count = 10;
  std::map<std::string, int> assignment;  // path (generic form) -> fold
  int test_fold = 0;
  std::uint64_t seed = 0;

  int fold_of(const fs::path& p) const {
    auto it = assignment.find(p.generic_string());
    if (it == assignment.end()) throw SplitError("file not in split: " + p.generic_string());
    return it->second;
  }

  bool is_test(const fs::path& p) const { return fold_of(p) == test_fold; }

  std::vector<std::size_t> fold_sizes() const {
    std::vector<std::size_t> sizes(static_cast<std::size_t>(fold_count), 0);
    for (const auto& [_, fold] : assignment) ++sizes[static_cast<std::size_t>(fold)];
    return sizes;
  }
};

inline bool is_valid_utf8(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    std::size_t extra = 0;
    std::uint32_t cp = 0;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      extra = 1;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      extra = 2;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      extra = 3;
      cp = c & 0x07;
    } else {
      return false;
    }
    if (i + extra >= s.size()) return false;
    for (std::size_t k = 1; k <= extra; ++k) {
      const auto cc = static_cast<unsigned char>(s[i + k]);
      if ((cc & 0xC0) != 0x80) return false;
      cp = (cp << 6) | (cc & 0x3F);
    }
    // Overlong encodings and surrogates.
    if ((extra == 1 && cp < 0x80) || (extra == 2 && cp < 0x800) || (extra == 3 && cp < 0x10000) ||
        cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF))
      return false;
    i += extra + 1;
  }
  return true;
}

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CorpusError("cannot read " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Recursive listing of every file under `root` whose name ends with
// `extension`, sorted by path. The project id is the first directory below
// root; files sitting directly in root take root's own name.
inline CorpusListing scan_corpus(const fs::path& root, std::string_view extension) {
  std::error_code ec;
  if (!fs::is_directory(root, ec)) throw CorpusError("corpus root is not a readable directory: " + root.string());

  std::vector<fs::path> paths;
  fs::recursive_directory_iterator it(root, fs::directory_options::skip_permission_denied, ec);
  if (ec) throw CorpusError("cannot open corpus root " + root.string() + ": " + ec.message());
  for (const auto& entry : it) {
    if (!entry.is_regular_file()) continue;
    const auto name = entry.path().filename().string();
    if (name.size() >= extension.size() && name.compare(name.size() - extension.size(), extension.size(), extension) == 0)
      paths.push_back(entry.path());
  }
  std::sort(paths.begin(), paths.end());

  auto norm_root = fs::absolute(root).lexically_normal();
  if (norm_root.filename().empty()) norm_root = norm_root.parent_path();
  const auto root_name = norm_root.filename().string();
  CorpusListing listing;
  for (const auto& p : paths) {
    auto text = read_file(p);
    if (!is_valid_utf8(text)) {
      listing.warnings.push_back("skipped non-UTF-8 file " + p.generic_string());
      continue;
    }
    const auto rel = p.lexically_relative(root);
    std::string project = root_name;
    if (std::distance(rel.begin(), rel.end()) > 1) project = rel.begin()->string();
    listing.files.push_back({p, std::move(project), std::move(text)});
  }
  return listing;
}

namespace detail {

inline void assign_round_robin(std::vector<const SourceFile*> group, int fold_count, int start, Rng& rng,
                               std::map<std::string, int>& out) {
  rng.shuffle(std::span(group));
  for (std::size_t i = 0; i < group.size(); ++i)
    out[group[i]->path.generic_string()] = static_cast<int>((static_cast<std::size_t>(start) + i) % fold_count);
}

}  // namespace detail

// Global split: seeded shuffle of the whole listing, then round-robin.
inline FoldSplit split_folds(const std::vector<SourceFile>& files, int fold_count, std::uint64_t seed) {
  if (fold_count < 2) throw SplitError("fold_count must be at least 2");
  if (files.empty()) throw SplitError("cannot split an empty file list");
  if (static_cast<std::size_t>(fold_count) > files.size())
    throw SplitError("fold_count " + std::to_string(fold_count) + " exceeds file count " + std::to_string(files.size()));

  FoldSplit split;
  split.fold_count = fold_count;
  split.seed = seed;
  Rng rng(seed);
  std::vector<const SourceFile*> all;
  for (const auto& f : files) all.push_back(&f);
  detail::assign_round_robin(std::move(all), fold_count, 0, rng, split.assignment);
  return split;
}

// Per-project split: each project is shuffled and dealt round-robin on its
// own, with the starting fold rotated so that global fold sizes also stay
// within one of each other. Projects smaller than fold_count leave some folds
// empty for that project.
inline FoldSplit split_folds_per_project(const std::vector<SourceFile>& files, int fold_count, std::uint64_t seed) {
  if (fold_count < 2) throw SplitError("fold_count must be at least 2");
  if (files.empty()) throw SplitError("cannot split an empty file list");
  if (static_cast<std::size_t>(fold_count) > files.size())
    throw SplitError("fold_count " + std::to_string(fold_count) + " exceeds file count " + std::to_string(files.size()));

  std::map<std::string, std::vector<const SourceFile*>> by_project;
  for (const auto& f : files) by_project[f.project_id].push_back(&f);

  FoldSplit split;
  split.fold_count = fold_count;
  split.seed = seed;
  Rng rng(seed);
  std::size_t assigned = 0;
  for (auto& [_, group] : by_project) {
    const auto n = group.size();
    detail::assign_round_robin(std::move(group), fold_count, static_cast<int>(assigned % fold_count), rng,
                               split.assignment);
    assigned += n;
  }
  return split;
}

// Corpus manifest: JSON Lines, one {"path","project","fold"} object per file.
inline void write_manifest(std::ostream& out, const std::vector<SourceFile>& files, const FoldSplit& split) {
  for (const auto& f : files) {
    nlohmann::json rec = {{"path", f.path.generic_string()}, {"project", f.project_id}, {"fold", split.fold_of(f.path)}};
    out << rec.dump() << '\n';
  }
}

struct ManifestRecord {
  std::string path;
  std::string project;
  int fold = 0;
};

inline std::vector<ManifestRecord> read_manifest(std::istream& in) {
  std::vector<ManifestRecord> records;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      auto j = nlohmann::json::parse(line);
      records.push_back({j.at("path").get<std::string>(), j.at("project").get<std::string>(), j.at("fold").get<int>()});
    } catch (const nlohmann::json::exception& e) {
      throw CorpusError("manifest line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return records;
}

}  // namespace codegru
