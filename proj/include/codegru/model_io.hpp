#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "codegru/config.hpp"
#include "codegru/errors.hpp"
#include "codegru/neural_lm.hpp"
#include "codegru/vocabulary.hpp"

namespace codegru {

// A trained model together with everything needed to feed it text.
struct LanguageModel {
  ModelParams params;
  Vocabulary vocab;
  TrainConfig config;
};

// Container layout (all integers little-endian):
//   0   4 bytes  magic "CGRU"
//   4   u32      format version
//   8   u64      metadata length N
//   16  N bytes  UTF-8 JSON metadata (dims, cell, config, vocabulary,
//                tensor table [{name, rows, cols}] in storage order)
//   16+N         each tensor's entries as f32, row-major, in table order
inline constexpr char model_magic[4] = {'C', 'G', 'R', 'U'};
inline constexpr std::uint32_t model_format_version = 1;

namespace detail {

inline void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}
inline void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}
inline std::uint64_t get_le(const std::string& in, std::size_t off, int bytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[off + static_cast<std::size_t>(i)])) << (8 * i);
  return v;
}

}  // namespace detail

inline std::string serialize_model(const LanguageModel& m) {
  nlohmann::json tensors = nlohmann::json::array();
  m.params.for_each_tensor([&](std::string_view name, const Matrix& t) {
    tensors.push_back({{"name", std::string(name)}, {"rows", t.rows()}, {"cols", t.cols()}});
  });
  const nlohmann::json meta = {
      {"cell", to_string(m.params.cell)},
      {"dims", {{"vocab", m.params.dims.vocab}, {"embed", m.params.dims.embed}, {"hidden", m.params.dims.hidden}}},
      {"use_bias", m.params.use_bias},
      {"config", to_json(m.config)},
      {"vocabulary", m.vocab.tokens()},
      {"tensors", tensors}};
  const std::string meta_text = meta.dump();

  std::string out(model_magic, 4);
  detail::put_u32(out, model_format_version);
  detail::put_u64(out, meta_text.size());
  out += meta_text;
  m.params.for_each_tensor([&](std::string_view, const Matrix& t) {
    for (Eigen::Index i = 0; i < t.size(); ++i) {
      const auto f = static_cast<float>(t.data()[i]);
      detail::put_u32(out, std::bit_cast<std::uint32_t>(f));
    }
  });
  return out;
}

// Parses a whole container; throws FormatError (with the byte offset)
// before constructing anything on malformed or truncated input.
inline LanguageModel deserialize_model(const std::string& bytes) {
  if (bytes.size() < 16) throw FormatError("truncated header", bytes.size());
  if (std::memcmp(bytes.data(), model_magic, 4) != 0) throw FormatError("bad magic, not a CGRU model", 0);
  const auto version = static_cast<std::uint32_t>(detail::get_le(bytes, 4, 4));
  if (version != model_format_version) throw FormatError("unsupported format version " + std::to_string(version), 4);
  const auto meta_len = detail::get_le(bytes, 8, 8);
  if (meta_len > bytes.size() - 16) throw FormatError("truncated metadata block", bytes.size());

  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(bytes.begin() + 16, bytes.begin() + 16 + static_cast<std::ptrdiff_t>(meta_len));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed metadata: ") + e.what(), 16);
  }

  LanguageModel m;
  try {
    const auto cell = parse_cell_kind(meta.at("cell").get<std::string>());
    const ModelDims dims{meta.at("dims").at("vocab").get<std::size_t>(), meta.at("dims").at("embed").get<std::size_t>(),
                         meta.at("dims").at("hidden").get<std::size_t>()};
    m.params = ModelParams::zeros(cell, dims, meta.at("use_bias").get<bool>());
    m.config = config_from_json(meta.at("config"));
    m.vocab = Vocabulary::from_tokens(meta.at("vocabulary").get<std::vector<std::string>>());
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("incomplete metadata: ") + e.what(), 16);
  } catch (const Error& e) {
    throw FormatError(std::string("inconsistent metadata: ") + e.what(), 16);
  }
  if (m.vocab.size() != m.params.dims.vocab) throw FormatError("vocabulary size does not match model dims", 16);

  const auto& table = meta.at("tensors");
  std::size_t offset = 16 + static_cast<std::size_t>(meta_len);
  std::size_t index = 0;
  bool layout_ok = true;
  std::string problem;
  m.params.for_each_tensor([&](std::string_view name, Matrix& t) {
    if (!layout_ok) return;
    if (index >= table.size()) {
      layout_ok = false;
      problem = "tensor table is missing " + std::string(name);
      return;
    }
    const auto& entry = table[index++];
    if (entry.value("name", "") != name || entry.value("rows", -1) != t.rows() || entry.value("cols", -1) != t.cols()) {
      layout_ok = false;
      problem = "tensor table entry for " + std::string(name) + " does not match the model layout";
      return;
    }
    const std::size_t need = static_cast<std::size_t>(t.size()) * 4;
    if (bytes.size() - offset < need) {
      layout_ok = false;
      problem = "truncated tensor data for " + std::string(name);
      return;
    }
    for (Eigen::Index i = 0; i < t.size(); ++i) {
      const auto bits = static_cast<std::uint32_t>(detail::get_le(bytes, offset, 4));
      t.data()[i] = static_cast<double>(std::bit_cast<float>(bits));
      offset += 4;
    }
  });
  if (!layout_ok) throw FormatError(problem, offset);
  if (index != table.size()) throw FormatError("tensor table has extra entries", 16);
  if (offset != bytes.size()) throw FormatError("trailing bytes after tensor data", offset);
  return m;
}

// Writes through a temporary file and renames, so a failed save never
// leaves a half-written model behind.
inline void save_model(const LanguageModel& m, const std::filesystem::path& path) {
  const auto bytes = serialize_model(m);
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline LanguageModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open model file " + path.string(), 0);
  const std::string bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return deserialize_model(bytes);
}

// Rounds every tensor to the container's 4-byte precision.
inline ModelParams round_to_stored_precision(ModelParams p) {
  p.for_each_tensor([](std::string_view, Matrix& t) {
    for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = static_cast<double>(static_cast<float>(t.data()[i]));
  });
  return p;
}

}  // namespace codegru
