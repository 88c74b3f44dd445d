#pragma once
// Central finite-difference check of backprop against the double-precision
// reference network.
#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "gradlens/nn/network.hpp"
#include "reference_net.hpp"

namespace gradlens::testing {

// Downsized network with every layer type of the mammography CNN.
inline nn::NetworkSpec toy_spec(int side) {
  using namespace gradlens::nn;
  NetworkSpec s;
  s.input = {side, side, 3};
  if (side >= 32) {
    s.layers = {ConvSpec{4, 5, 1, 0, Activation::kRelu}, PoolSpec{2, 2},
                ConvSpec{4, 5, 1, 0, Activation::kRelu}, PoolSpec{2, 2},
                ConvSpec{3, 3, 1, 1, Activation::kRelu}, PoolSpec{2, 2},
                FlattenSpec{},
                DenseSpec{8, Activation::kRelu}, DenseSpec{6, Activation::kRelu},
                DenseSpec{4, Activation::kRelu}, DropoutSpec{0.5f},
                DenseSpec{3, Activation::kSoftmax}};
  } else {
    s.layers = {ConvSpec{4, 3, 1, 0, Activation::kRelu}, PoolSpec{2, 2},
                ConvSpec{3, 3, 1, 1, Activation::kRelu}, PoolSpec{2, 2},
                FlattenSpec{},
                DenseSpec{6, Activation::kRelu}, DropoutSpec{0.5f},
                DenseSpec{3, Activation::kSoftmax}};
  }
  return s;
}

inline Tensor random_image(int h, int w, int c, std::uint64_t seed) {
  Rng rng(seed);
  Tensor t({h, w, c});
  for (auto& v : t.values()) v = static_cast<float>(rng.uniform());
  return t;
}

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  // Points where one-sided differences disagree (ReLU zeros, pooling ties);
  // the function is not differentiable there.
  std::size_t kinks = 0;
  std::string worst;  // location of the largest error
};

inline double relative_error(double a, double b) {
  const double denom = std::max({std::abs(a), std::abs(b), 1e-5});
  return std::abs(a - b) / denom;
}

inline void record(GradCheckResult& r, double analytic, double f0, double up, double down, double h,
                   const std::string& where) {
  if (relative_error((up - f0) / h, (f0 - down) / h) > 1e-3) {
    ++r.kinks;
    return;
  }
  const double numeric = (up - down) / (2 * h);
  const double e = relative_error(analytic, numeric);
  ++r.checked;
  if (e > r.max_rel_error) {
    r.max_rel_error = e;
    r.worst = where + " analytic=" + std::to_string(analytic) + " numeric=" + std::to_string(numeric);
  }
}

// Scalar objective L = sum_i r_i * logit_i. Compares every parameter gradient
// and the gradient of each captured layer output against central differences.
inline GradCheckResult check_gradients(const nn::NetworkState& state, const Tensor& image,
                                       const std::vector<double>& r, double h,
                                       const std::vector<std::size_t>& capture_layers, bool training,
                                       std::uint64_t dropout_seed = 7) {
  Rng rng(dropout_seed);
  const nn::ForwardTrace trace =
      nn::forward(state, image, training ? nn::Mode::kTraining : nn::Mode::kInference, &rng);
  Tensor grad_logits({static_cast<int>(r.size())});
  for (std::size_t i = 0; i < r.size(); ++i) grad_logits[i] = static_cast<float>(r[i]);
  nn::BackpropOptions opts;
  opts.capture_layers = capture_layers;
  const nn::Gradients g = nn::backprop(state, trace, grad_logits, opts);

  std::map<std::size_t, std::vector<float>> masks;
  for (std::size_t li = 0; li < trace.dropout_scale.size(); ++li) {
    if (!trace.dropout_scale[li].empty()) masks[li] = trace.dropout_scale[li];
  }
  const auto objective = [&](const std::vector<double>& logits) {
    double s = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) s += r[i] * logits[i];
    return s;
  };

  GradCheckResult result;
  RefParams p = to_ref(state.params);
  const RefTensor x = to_ref(image);
  const double f0 = objective(ref_logits(state.spec, p, x, 0, masks));
  for (std::size_t li = 0; li < p.weights.size(); ++li) {
    for (int which = 0; which < 2; ++which) {
      auto& vec = which == 0 ? p.weights[li] : p.bias[li];
      const Tensor& analytic = which == 0 ? g.params[li].weights : g.params[li].bias;
      for (std::size_t j = 0; j < vec.size(); ++j) {
        const double saved = vec[j];
        vec[j] = saved + h;
        const double up = objective(ref_logits(state.spec, p, x, 0, masks));
        vec[j] = saved - h;
        const double down = objective(ref_logits(state.spec, p, x, 0, masks));
        vec[j] = saved;
        record(result, analytic[j], f0, up, down, h,
               "layer " + std::to_string(li) + (which == 0 ? " weight " : " bias ") + std::to_string(j));
      }
    }
  }
  for (std::size_t layer : capture_layers) {
    RefTensor a = to_ref(trace.outputs[layer]);
    const Tensor& analytic = g.activations.at(layer);
    // Baseline from the float activation itself, not the full double path.
    const double fa = objective(ref_logits(state.spec, p, a, layer + 1, masks));
    for (std::size_t j = 0; j < a.v.size(); ++j) {
      const double saved = a.v[j];
      a.v[j] = saved + h;
      const double up = objective(ref_logits(state.spec, p, a, layer + 1, masks));
      a.v[j] = saved - h;
      const double down = objective(ref_logits(state.spec, p, a, layer + 1, masks));
      a.v[j] = saved;
      record(result, analytic[j], fa, up, down, h,
             "activation " + std::to_string(layer) + " index " + std::to_string(j));
    }
  }
  return result;
}

}  // namespace gradlens::testing
