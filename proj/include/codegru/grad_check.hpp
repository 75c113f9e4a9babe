#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "codegru/context.hpp"
#include "codegru/errors.hpp"
#include "codegru/neural_lm.hpp"
#include "codegru/rng.hpp"

namespace codegru {

struct TensorCheck {
  std::string name;
  std::size_t coordinates = 0;
  double max_relative_error = 0.0;
};

struct GradCheckReport {
  double max_relative_error = 0.0;
  std::vector<TensorCheck> tensors;
};

// Differences smaller than this are compared absolutely rather than
// relative to a near-zero gradient; it sits well above the round-off of a
// central difference at epsilon = 1e-5 in double precision.
inline constexpr double grad_check_abs_floor = 1e-6;

inline double relative_error(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), grad_check_abs_floor});
  return std::abs(analytic - numeric) / denom;
}

// Compares backward() with central differences of the per-example loss on
// up to `samples_per_tensor` coordinates of every tensor (all of them when
// the tensor is smaller). Evaluation mode: no dropout.
inline GradCheckReport grad_check(const ModelParams& params, const TrainingExample& example, double epsilon,
                                  std::size_t samples_per_tensor = 200, std::uint64_t seed = 7) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw ConfigError("grad_check epsilon must be a positive finite number");

  ModelParams work = params;
  const TokenId targets[] = {example.target};
  const auto cache = forward(work, example.context);
  const ModelParams analytic = backward(cache, targets, work);

  auto eval_loss = [&] { return loss(RowVector(predict(work, example.context)), example.target); };

  std::vector<const Matrix*> grads;
  analytic.for_each_tensor([&](std::string_view, const Matrix& m) { grads.push_back(&m); });

  GradCheckReport report;
  Rng rng(seed);
  std::size_t index = 0;
  work.for_each_tensor([&](std::string_view name, Matrix& w) {
    const Matrix& g = *grads[index++];
    const auto size = static_cast<std::size_t>(w.size());
    std::vector<std::size_t> coords(size);
    std::iota(coords.begin(), coords.end(), std::size_t{0});
    if (size > samples_per_tensor) {
      rng.shuffle(std::span(coords));
      coords.resize(samples_per_tensor);
    }
    TensorCheck tc{std::string(name), coords.size(), 0.0};
    for (auto c : coords) {
      double& slot = w.data()[c];
      const double saved = slot;
      slot = saved + epsilon;
      const double up = eval_loss();
      slot = saved - epsilon;
      const double down = eval_loss();
      slot = saved;
      const double numeric = (up - down) / (2.0 * epsilon);
      tc.max_relative_error = std::max(tc.max_relative_error, relative_error(g.data()[c], numeric));
    }
    report.max_relative_error = std::max(report.max_relative_error, tc.max_relative_error);
    report.tensors.push_back(std::move(tc));
  });
  return report;
}

}  // namespace codegru
