#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "gradlens/nn/ops.hpp"
#include "gradlens/nn/spec.hpp"
#include "gradlens/tensor.hpp"

namespace gradlens::nn {

// Trainable tensors of one layer; both empty for pooling/flatten/dropout.
struct LayerParams {
  Tensor weights;
  Tensor bias;
  friend bool operator==(const LayerParams&, const LayerParams&) = default;
};

struct NetworkState {
  NetworkSpec spec;
  std::vector<LayerParams> params;
  bool training = false;

  std::size_t parameter_count() const;
};

// He-normal weights (variance 2/fan_in), zero biases.
NetworkState build_network(const NetworkSpec& spec, std::uint64_t seed);

// Zero-valued tensors shaped like the parameters of `spec`.
std::vector<LayerParams> zero_gradients(const NetworkSpec& spec);

struct ForwardTrace {
  Tensor input;
  // Post-activation output of every layer; for a softmax head this holds the
  // probabilities.
  std::vector<Tensor> outputs;
  // Pre-softmax scores of the final layer.
  Tensor logits;
  std::vector<std::vector<std::int32_t>> pool_argmax;
  std::vector<std::vector<float>> dropout_scale;
  std::vector<Shape3> shapes;

  const Tensor& probabilities() const { return outputs.back(); }
};

// Runs every layer. Dropout is active only when state.training is set, in
// which case `rng` must be provided.
ForwardTrace forward(const NetworkState& state, const Tensor& input, Rng* rng = nullptr);
ForwardTrace forward(const NetworkState& state, const Tensor& input, Mode mode, Rng* rng = nullptr);

// Inference-mode logits of layers first_layer..end, starting from
// `activation` (the output of layer first_layer - 1).
Tensor logits_from(const NetworkState& state, std::size_t first_layer, const Tensor& activation);

struct BackpropOptions {
  bool parameter_gradients = true;
  // Layers whose output gradient should be captured.
  std::vector<std::size_t> capture_layers;
};

struct Gradients {
  std::vector<LayerParams> params;  // empty when parameter_gradients is false
  std::map<std::size_t, Tensor> activations;
};

// Reverse pass from the gradient with respect to the final logits.
// When `accumulate` is given, parameter gradients are added into it and
// Gradients::params stays empty.
Gradients backprop(const NetworkState& state, const ForwardTrace& trace, const Tensor& grad_logits,
                   const BackpropOptions& options = {},
                   std::vector<LayerParams>* accumulate = nullptr);

struct Prediction {
  std::vector<float> probabilities;
  int label = 0;
};

// Argmax ties resolve to the lowest class index.
int argmax(std::span<const float> values);

// Always runs in inference mode, whatever state.training says.
Prediction predict(const NetworkState& state, const Tensor& image);

}  // namespace gradlens::nn
