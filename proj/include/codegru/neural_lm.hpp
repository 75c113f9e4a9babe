#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "codegru/errors.hpp"
#include "codegru/rng.hpp"
#include "codegru/vocabulary.hpp"

namespace codegru {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVector = Eigen::RowVectorXd;

enum class CellKind { rnn, gru };

inline std::string to_string(CellKind c) { return c == CellKind::gru ? "gru" : "rnn"; }

inline CellKind parse_cell_kind(const std::string& s) {
  if (s == "gru") return CellKind::gru;
  if (s == "rnn") return CellKind::rnn;
  throw ConfigError("unknown cell kind '" + s + "' (expected rnn|gru)");
}

struct ModelDims {
  std::size_t vocab = 0;
  std::size_t embed = 0;
  std::size_t hidden = 0;

  friend bool operator==(const ModelDims&, const ModelDims&) = default;
};

inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

template <class Derived>
Matrix sigmoid(const Eigen::MatrixBase<Derived>& m) {
  return m.unaryExpr([](double v) { return sigmoid(v); });
}

// All trainable tensors, row-vector convention (x * W). Embedding is
// |V| x embed, input weights embed x hidden, recurrent weights hidden x
// hidden, biases 1 x hidden, output projection hidden x |V| plus 1 x |V|.
// The RNN cell uses only the w_h/u_h/b_h slots. Biases stay allocated (at
// zero) when use_bias is false but are not exposed as tensors.
struct ModelParams {
  CellKind cell = CellKind::gru;
  ModelDims dims;
  bool use_bias = true;

  Matrix embedding;
  Matrix w_z, u_z, b_z;
  Matrix w_r, u_r, b_r;
  Matrix w_h, u_h, b_h;
  Matrix w_out, b_out;

  // Bumped by every optimizer update; forward caches remember it.
  std::uint64_t generation = 0;

  static ModelParams zeros(CellKind cell, ModelDims dims, bool use_bias = true) {
    if (dims.vocab == 0 || dims.embed == 0 || dims.hidden == 0) throw DimensionError("model dimensions must be positive");
    ModelParams p;
    p.cell = cell;
    p.dims = dims;
    p.use_bias = use_bias;
    const auto V = static_cast<Eigen::Index>(dims.vocab);
    const auto D = static_cast<Eigen::Index>(dims.embed);
    const auto H = static_cast<Eigen::Index>(dims.hidden);
    p.embedding = Matrix::Zero(V, D);
    if (cell == CellKind::gru) {
      p.w_z = Matrix::Zero(D, H);
      p.u_z = Matrix::Zero(H, H);
      p.b_z = Matrix::Zero(1, H);
      p.w_r = Matrix::Zero(D, H);
      p.u_r = Matrix::Zero(H, H);
      p.b_r = Matrix::Zero(1, H);
    }
    p.w_h = Matrix::Zero(D, H);
    p.u_h = Matrix::Zero(H, H);
    p.b_h = Matrix::Zero(1, H);
    p.w_out = Matrix::Zero(H, V);
    p.b_out = Matrix::Zero(1, V);
    return p;
  }

  // Glorot-uniform weights, zero biases.
  static ModelParams glorot(CellKind cell, ModelDims dims, std::uint64_t seed, bool use_bias = true) {
    ModelParams p = zeros(cell, dims, use_bias);
    Rng rng(seed);
    p.for_each_tensor([&](std::string_view name, Matrix& m) {
      if (name.front() == 'b') return;
      const double a = std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols()));
      for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-a, a);
    });
    return p;
  }

  // Same shapes, all zero: the layout used for gradients.
  ModelParams zeros_like() const {
    ModelParams g = zeros(cell, dims, use_bias);
    return g;
  }

  // Visits the active tensors in their fixed serialization order.
  template <class F>
  void for_each_tensor(F&& f) {
    visit_impl(*this, f);
  }
  template <class F>
  void for_each_tensor(F&& f) const {
    visit_impl(*this, f);
  }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for_each_tensor([&](std::string_view, const Matrix& m) { n += static_cast<std::size_t>(m.size()); });
    return n;
  }

 private:
  template <class Self, class F>
  static void visit_impl(Self& s, F& f) {
    f(std::string_view("embedding"), s.embedding);
    if (s.cell == CellKind::gru) {
      f(std::string_view("w_z"), s.w_z);
      f(std::string_view("u_z"), s.u_z);
      if (s.use_bias) f(std::string_view("b_z"), s.b_z);
      f(std::string_view("w_r"), s.w_r);
      f(std::string_view("u_r"), s.u_r);
      if (s.use_bias) f(std::string_view("b_r"), s.b_r);
      f(std::string_view("w_h"), s.w_h);
      f(std::string_view("u_h"), s.u_h);
      if (s.use_bias) f(std::string_view("b_h"), s.b_h);
    } else {
      f(std::string_view("w"), s.w_h);
      f(std::string_view("u"), s.u_h);
      if (s.use_bias) f(std::string_view("b"), s.b_h);
    }
    f(std::string_view("w_out"), s.w_out);
    if (s.use_bias) f(std::string_view("b_out"), s.b_out);
  }
};

// Pointers to the active tensors of two same-layout parameter sets, paired.
inline std::vector<std::pair<Matrix*, const Matrix*>> paired_tensors(ModelParams& a, const ModelParams& b) {
  std::vector<Matrix*> left;
  std::vector<const Matrix*> right;
  a.for_each_tensor([&](std::string_view, Matrix& m) { left.push_back(&m); });
  b.for_each_tensor([&](std::string_view, const Matrix& m) { right.push_back(&m); });
  if (left.size() != right.size()) throw DimensionError("parameter layouts differ");
  std::vector<std::pair<Matrix*, const Matrix*>> out;
  for (std::size_t i = 0; i < left.size(); ++i) {
    if (left[i]->rows() != right[i]->rows() || left[i]->cols() != right[i]->cols())
      throw DimensionError("tensor shapes differ");
    out.emplace_back(left[i], right[i]);
  }
  return out;
}

namespace detail {

inline void require_shape(const Matrix& m, Eigen::Index rows, Eigen::Index cols, const char* what) {
  if (m.rows() != rows || m.cols() != cols)
    throw DimensionError(std::string(what) + ": expected " + std::to_string(rows) + "x" + std::to_string(cols) +
                         ", got " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
}

inline void add_bias(Matrix& a, const Matrix& b) { a.rowwise() += b.row(0); }

}  // namespace detail

// Per-timestep activations kept for backpropagation. Rows are batch entries.
struct StepCache {
  Matrix x;       // embedded inputs
  Matrix h_prev;
  Matrix z, r, c; // GRU gates and candidate (unused for RNN)
  Matrix h;
};

// One recurrent step over a batch. `cache` may be null.
inline Matrix cell_step(const ModelParams& p, const Matrix& x, const Matrix& h_prev, StepCache* cache = nullptr) {
  const auto D = static_cast<Eigen::Index>(p.dims.embed);
  const auto H = static_cast<Eigen::Index>(p.dims.hidden);
  if (x.cols() != D) throw DimensionError("input width " + std::to_string(x.cols()) + " != embed_dim " + std::to_string(D));
  if (h_prev.cols() != H || h_prev.rows() != x.rows())
    throw DimensionError("hidden state shape does not match batch/hidden_dim");

  if (p.cell == CellKind::rnn) {
    Matrix a = x * p.w_h;
    a.noalias() += h_prev * p.u_h;
    detail::add_bias(a, p.b_h);
    Matrix h = a.array().tanh().matrix();
    if (cache) *cache = StepCache{x, h_prev, {}, {}, {}, h};
    return h;
  }

  Matrix az = x * p.w_z;
  az.noalias() += h_prev * p.u_z;
  detail::add_bias(az, p.b_z);
  Matrix z = sigmoid(az);

  Matrix ar = x * p.w_r;
  ar.noalias() += h_prev * p.u_r;
  detail::add_bias(ar, p.b_r);
  Matrix r = sigmoid(ar);

  const Matrix reset_state = r.cwiseProduct(h_prev);
  Matrix ah = x * p.w_h;
  ah.noalias() += reset_state * p.u_h;
  detail::add_bias(ah, p.b_h);
  Matrix c = ah.array().tanh().matrix();

  Matrix h = h_prev + z.cwiseProduct(c - h_prev);
  if (cache) *cache = StepCache{x, h_prev, std::move(z), std::move(r), std::move(c), h};
  return h;
}

// h = tanh(x W + h_prev U + b)
inline RowVector rnn_step(const RowVector& x, const RowVector& h_prev, const ModelParams& p) {
  if (p.cell != CellKind::rnn) throw DimensionError("rnn_step called on a GRU model");
  return cell_step(p, Matrix(x), Matrix(h_prev)).row(0);
}

// z = sig(x Wz + h Uz + bz), r = sig(x Wr + h Ur + br),
// c = tanh(x Wh + (r * h) Uh + bh), h' = (1 - z) * h + z * c
inline RowVector gru_step(const RowVector& x, const RowVector& h_prev, const ModelParams& p) {
  if (p.cell != CellKind::gru) throw DimensionError("gru_step called on an RNN model");
  return cell_step(p, Matrix(x), Matrix(h_prev)).row(0);
}

inline void softmax_rows(Matrix& logits) {
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    auto row = logits.row(i);
    const double mx = row.maxCoeff();
    row = (row.array() - mx).exp().matrix();
    row /= row.sum();
  }
}

struct ForwardCache {
  std::vector<std::vector<TokenId>> ids;  // [step][batch]
  std::vector<StepCache> steps;
  Matrix mask;       // dropout mask on the final state; empty when not training
  Matrix h_out;      // final state after dropout
  Matrix probs;      // batch x |V|
  const ModelParams* params = nullptr;
  std::uint64_t generation = 0;

  std::size_t batch() const { return static_cast<std::size_t>(probs.rows()); }
};

// Forward pass over a batch of equal-length contexts. `dropout_mask`, when
// given, is batch x hidden and multiplies the final hidden state.
inline ForwardCache forward_batch(const ModelParams& p, std::span<const std::span<const TokenId>> contexts,
                                  const Matrix* dropout_mask = nullptr) {
  if (contexts.empty()) throw DimensionError("empty batch");
  const std::size_t len = contexts.front().size();
  if (len == 0) throw DimensionError("context length must be at least 1");
  const auto B = static_cast<Eigen::Index>(contexts.size());
  const auto H = static_cast<Eigen::Index>(p.dims.hidden);
  const auto D = static_cast<Eigen::Index>(p.dims.embed);

  ForwardCache cache;
  cache.params = &p;
  cache.generation = p.generation;
  cache.ids.assign(len, std::vector<TokenId>(contexts.size()));
  for (std::size_t b = 0; b < contexts.size(); ++b) {
    if (contexts[b].size() != len) throw DimensionError("contexts in a batch must share one length");
    for (std::size_t t = 0; t < len; ++t) {
      const TokenId id = contexts[b][t];
      if (id < 0 || static_cast<std::size_t>(id) >= p.dims.vocab)
        throw VectorizationError("token id " + std::to_string(id) + " outside vocabulary of size " +
                                 std::to_string(p.dims.vocab));
      cache.ids[t][b] = id;
    }
  }

  cache.steps.resize(len);
  Matrix h = Matrix::Zero(B, H);
  Matrix x(B, D);
  for (std::size_t t = 0; t < len; ++t) {
    for (Eigen::Index b = 0; b < B; ++b) x.row(b) = p.embedding.row(cache.ids[t][static_cast<std::size_t>(b)]);
    h = cell_step(p, x, h, &cache.steps[t]);
  }

  if (dropout_mask) {
    detail::require_shape(*dropout_mask, B, H, "dropout mask");
    cache.mask = *dropout_mask;
    cache.h_out = h.cwiseProduct(*dropout_mask);
  } else {
    cache.h_out = std::move(h);
  }
  cache.probs = cache.h_out * p.w_out;
  detail::add_bias(cache.probs, p.b_out);
  softmax_rows(cache.probs);
  return cache;
}

inline ForwardCache forward(const ModelParams& p, std::span<const TokenId> context, const Matrix* dropout_mask = nullptr) {
  const std::span<const TokenId> one[] = {context};
  return forward_batch(p, one, dropout_mask);
}

// Next-token distribution for one context (evaluation mode).
inline RowVector predict(const ModelParams& p, std::span<const TokenId> context) {
  return forward(p, context).probs.row(0);
}

inline constexpr double probability_floor = 1e-12;

// Cross-entropy in bits for one prediction.
inline double loss(std::span<const double> probs, TokenId target) {
  if (target < 0 || static_cast<std::size_t>(target) >= probs.size()) throw VectorizationError("target id out of range");
  return -std::log2(std::max(probs[static_cast<std::size_t>(target)], probability_floor));
}

inline double loss(const RowVector& probs, TokenId target) {
  return loss(std::span<const double>(probs.data(), static_cast<std::size_t>(probs.size())), target);
}

// Mean per-example loss of a forward batch.
inline double batch_loss(const ForwardCache& cache, std::span<const TokenId> targets) {
  double total = 0.0;
  for (std::size_t b = 0; b < targets.size(); ++b) {
    const auto row = cache.probs.row(static_cast<Eigen::Index>(b));
    total += loss(std::span<const double>(row.data(), static_cast<std::size_t>(row.size())), targets[b]);
  }
  return total / static_cast<double>(targets.size());
}

// Exact gradient of the mean batch loss (bits) with respect to every active
// tensor, by backpropagation through the whole context.
inline ModelParams backward(const ForwardCache& cache, std::span<const TokenId> targets, const ModelParams& p) {
  if (cache.params != &p || cache.generation != p.generation)
    throw ConsistencyError("forward cache was produced by different or since-updated parameters");
  if (targets.size() != cache.batch()) throw DimensionError("target count does not match batch size");

  ModelParams g = p.zeros_like();
  const auto B = static_cast<Eigen::Index>(cache.batch());
  const double scale = 1.0 / (std::numbers::ln2 * static_cast<double>(B));

  Matrix dlogits = cache.probs;
  for (Eigen::Index b = 0; b < B; ++b) dlogits(b, targets[static_cast<std::size_t>(b)]) -= 1.0;
  dlogits *= scale;

  g.w_out.noalias() = cache.h_out.transpose() * dlogits;
  if (p.use_bias) g.b_out = dlogits.colwise().sum();
  Matrix dh = dlogits * p.w_out.transpose();
  if (cache.mask.size() != 0) dh = dh.cwiseProduct(cache.mask);

  for (std::size_t step = cache.steps.size(); step-- > 0;) {
    const StepCache& s = cache.steps[step];
    Matrix dx;
    Matrix dh_prev;
    if (p.cell == CellKind::rnn) {
      const Matrix da = dh.cwiseProduct((1.0 - s.h.array().square()).matrix());
      g.w_h.noalias() += s.x.transpose() * da;
      g.u_h.noalias() += s.h_prev.transpose() * da;
      if (p.use_bias) g.b_h += da.colwise().sum();
      dx = da * p.w_h.transpose();
      dh_prev = da * p.u_h.transpose();
    } else {
      const Matrix dc = dh.cwiseProduct(s.z);
      const Matrix dz = dh.cwiseProduct(s.c - s.h_prev);
      dh_prev = dh.cwiseProduct((1.0 - s.z.array()).matrix());

      const Matrix dah = dc.cwiseProduct((1.0 - s.c.array().square()).matrix());
      const Matrix reset_state = s.r.cwiseProduct(s.h_prev);
      g.w_h.noalias() += s.x.transpose() * dah;
      g.u_h.noalias() += reset_state.transpose() * dah;
      if (p.use_bias) g.b_h += dah.colwise().sum();
      dx = dah * p.w_h.transpose();
      const Matrix dreset = dah * p.u_h.transpose();
      const Matrix dr = dreset.cwiseProduct(s.h_prev);
      dh_prev += dreset.cwiseProduct(s.r);

      const Matrix daz = dz.cwiseProduct((s.z.array() * (1.0 - s.z.array())).matrix());
      g.w_z.noalias() += s.x.transpose() * daz;
      g.u_z.noalias() += s.h_prev.transpose() * daz;
      if (p.use_bias) g.b_z += daz.colwise().sum();
      dx.noalias() += daz * p.w_z.transpose();
      dh_prev.noalias() += daz * p.u_z.transpose();

      const Matrix dar = dr.cwiseProduct((s.r.array() * (1.0 - s.r.array())).matrix());
      g.w_r.noalias() += s.x.transpose() * dar;
      g.u_r.noalias() += s.h_prev.transpose() * dar;
      if (p.use_bias) g.b_r += dar.colwise().sum();
      dx.noalias() += dar * p.w_r.transpose();
      dh_prev.noalias() += dar * p.u_r.transpose();
    }
    for (Eigen::Index b = 0; b < B; ++b) g.embedding.row(cache.ids[step][static_cast<std::size_t>(b)]) += dx.row(b);
    dh = std::move(dh_prev);
  }
  return g;
}

struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t t = 0;
  std::vector<Matrix> m;
  std::vector<Matrix> v;
};

inline bool all_finite(const ModelParams& p) {
  bool ok = true;
  p.for_each_tensor([&](std::string_view, const Matrix& m) { ok = ok && m.allFinite(); });
  return ok;
}

// Bias-corrected Adam step. Throws DivergenceError, leaving params and
// state untouched, if any gradient entry is non-finite.
inline void adam_update(ModelParams& params, const ModelParams& grads, AdamState& state, double lr) {
  if (!all_finite(grads)) throw DivergenceError("non-finite gradient in Adam update");
  auto pairs = paired_tensors(params, grads);
  if (state.m.empty()) {
    for (auto& [w, _] : pairs) {
      state.m.push_back(Matrix::Zero(w->rows(), w->cols()));
      state.v.push_back(Matrix::Zero(w->rows(), w->cols()));
    }
  }
  if (state.m.size() != pairs.size()) throw DimensionError("Adam state does not match parameter layout");

  ++state.t;
  const double t = static_cast<double>(state.t);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    auto& w = *pairs[i].first;
    const auto& g = *pairs[i].second;
    auto& m = state.m[i];
    auto& v = state.v[i];
    m = state.beta1 * m + (1.0 - state.beta1) * g;
    v = state.beta2 * v + (1.0 - state.beta2) * g.cwiseProduct(g);
    w.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + state.epsilon);
  }
  ++params.generation;
}

}  // namespace codegru
