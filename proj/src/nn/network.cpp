#include "gradlens/nn/network.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace gradlens::nn {

namespace {

Tensor apply_layer(const NetworkState& state, std::size_t i, const Tensor& x, Mode mode, Rng* rng,
                   ForwardTrace* trace, Tensor* logits_out) {
  const auto& layer = state.spec.layers[i];
  const auto& p = state.params[i];
  if (const auto* c = std::get_if<ConvSpec>(&layer)) {
    return conv2d(x, p.weights, p.bias, c->stride, c->pad, c->activation);
  }
  if (const auto* pool = std::get_if<PoolSpec>(&layer)) {
    std::vector<std::int32_t>* idx = trace ? &trace->pool_argmax[i] : nullptr;
    return maxpool2d(x, pool->size, pool->stride, idx);
  }
  if (std::holds_alternative<FlattenSpec>(layer)) {
    return Tensor({static_cast<int>(x.size())}, std::vector<float>(x.values().begin(), x.values().end()));
  }
  if (const auto* d = std::get_if<DenseSpec>(&layer)) {
    if (d->activation == Activation::kSoftmax) {
      Tensor z = dense(x, p.weights, p.bias, Activation::kNone);
      Tensor probs = softmax(z);
      if (logits_out) *logits_out = std::move(z);
      return probs;
    }
    Tensor y = dense(x, p.weights, p.bias, d->activation);
    if (logits_out) *logits_out = y;
    return y;
  }
  const auto& drop = std::get<DropoutSpec>(layer);
  std::vector<float>* scale = trace ? &trace->dropout_scale[i] : nullptr;
  return dropout(x, drop.rate, mode, rng, scale);
}

void check_state(const NetworkState& state) {
  if (state.params.size() != state.spec.layers.size()) {
    throw std::invalid_argument("network state has " + std::to_string(state.params.size()) +
                                " parameter slots for " + std::to_string(state.spec.layers.size()) +
                                " layers");
  }
}

}  // namespace

std::size_t NetworkState::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : params) n += p.weights.size() + p.bias.size();
  return n;
}

std::vector<LayerParams> zero_gradients(const NetworkSpec& spec) {
  const auto shapes = layer_output_shapes(spec);
  std::vector<LayerParams> out(spec.layers.size());
  Shape3 in = spec.input;
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    if (const auto* c = std::get_if<ConvSpec>(&spec.layers[i])) {
      out[i].weights = Tensor({c->size, c->size, in.c, c->kernels});
      out[i].bias = Tensor({c->kernels});
    } else if (const auto* d = std::get_if<DenseSpec>(&spec.layers[i])) {
      out[i].weights = Tensor({static_cast<int>(in.count()), d->units});
      out[i].bias = Tensor({d->units});
    }
    in = shapes[i];
  }
  return out;
}

NetworkState build_network(const NetworkSpec& spec, std::uint64_t seed) {
  NetworkState state;
  state.spec = spec;
  state.params = zero_gradients(spec);
  Rng rng(derive_seed(seed, "he-init"));
  for (auto& p : state.params) {
    if (p.weights.empty()) continue;
    // fan_in = k*k*c_in for conv, input length for dense.
    const auto& s = p.weights.shape();
    const double fan_in = s.size() == 4 ? static_cast<double>(s[0]) * s[1] * s[2] : s[0];
    const double stddev = std::sqrt(2.0 / fan_in);
    for (auto& w : p.weights.values()) w = static_cast<float>(rng.normal() * stddev);
  }
  return state;
}

ForwardTrace forward(const NetworkState& state, const Tensor& input, Rng* rng) {
  return forward(state, input, state.training ? Mode::kTraining : Mode::kInference, rng);
}

ForwardTrace forward(const NetworkState& state, const Tensor& input, Mode mode, Rng* rng) {
  check_state(state);
  const Shape3& in = state.spec.input;
  if (input.size() != in.count() || input.rank() != 3 || input.dim(2) != in.c) {
    throw std::invalid_argument("input shape " + input.shape_string() + " does not match network input " +
                                format_input(in));
  }
  ForwardTrace trace;
  trace.shapes = layer_output_shapes(state.spec);
  trace.input = input;
  const std::size_t n = state.spec.layers.size();
  trace.outputs.resize(n);
  trace.pool_argmax.resize(n);
  trace.dropout_scale.resize(n);
  const Tensor* x = &trace.input;
  for (std::size_t i = 0; i < n; ++i) {
    Tensor* logits = i + 1 == n ? &trace.logits : nullptr;
    trace.outputs[i] = apply_layer(state, i, *x, mode, rng, &trace, logits);
    x = &trace.outputs[i];
  }
  if (n == 0) trace.logits = trace.input;
  return trace;
}

Tensor logits_from(const NetworkState& state, std::size_t first_layer, const Tensor& activation) {
  check_state(state);
  const std::size_t n = state.spec.layers.size();
  Tensor x = activation;
  Tensor logits = activation;
  for (std::size_t i = first_layer; i < n; ++i) {
    x = apply_layer(state, i, x, Mode::kInference, nullptr, nullptr, i + 1 == n ? &logits : nullptr);
  }
  return logits;
}

Gradients backprop(const NetworkState& state, const ForwardTrace& trace, const Tensor& grad_logits,
                   const BackpropOptions& options, std::vector<LayerParams>* accumulate) {
  check_state(state);
  const std::size_t n = state.spec.layers.size();
  if (trace.outputs.size() != n || trace.shapes != layer_output_shapes(state.spec)) {
    throw std::invalid_argument("forward trace does not belong to this network");
  }
  if (n == 0) return {};
  if (grad_logits.size() != trace.logits.size()) {
    throw std::invalid_argument("logit gradient has " + std::to_string(grad_logits.size()) +
                                " entries, network emits " + std::to_string(trace.logits.size()));
  }
  for (std::size_t layer : options.capture_layers) {
    if (layer >= n) throw std::invalid_argument("capture layer " + std::to_string(layer) + " out of range");
  }

  Gradients result;
  std::vector<LayerParams>* sink = nullptr;
  if (options.parameter_gradients) {
    if (accumulate) {
      sink = accumulate;
    } else {
      result.params = zero_gradients(state.spec);
      sink = &result.params;
    }
  }

  // Earliest layer the pass must reach.
  std::size_t stop = 0;
  if (!options.parameter_gradients) {
    stop = n;
    for (std::size_t layer : options.capture_layers) stop = std::min(stop, layer);
  }

  // The final layer's gradient arrives with respect to its pre-activation
  // output; represent it as a linear layer's output gradient.
  Tensor grad = grad_logits;
  for (std::size_t ii = n; ii-- > stop;) {
    const auto& layer = state.spec.layers[ii];
    const bool last = ii + 1 == n;
    if (!last && std::find(options.capture_layers.begin(), options.capture_layers.end(), ii) !=
                     options.capture_layers.end()) {
      result.activations[ii] = grad;
      if (!options.parameter_gradients && ii == stop) break;
    }
    const Tensor& in = ii == 0 ? trace.input : trace.outputs[ii - 1];
    const bool need_input = ii > stop;
    Tensor grad_in;
    LayerParams* gp = sink ? &(*sink)[ii] : nullptr;
    if (const auto* c = std::get_if<ConvSpec>(&layer)) {
      conv2d_backward(in, trace.outputs[ii], grad, state.params[ii].weights, c->stride, c->pad,
                      c->activation, gp ? &gp->weights : nullptr, gp ? &gp->bias : nullptr,
                      need_input ? &grad_in : nullptr);
    } else if (std::holds_alternative<PoolSpec>(layer)) {
      if (need_input) grad_in = maxpool2d_backward(grad, trace.pool_argmax[ii], in.shape());
    } else if (std::holds_alternative<FlattenSpec>(layer)) {
      grad_in = Tensor(in.shape(), std::vector<float>(grad.values().begin(), grad.values().end()));
    } else if (const auto* d = std::get_if<DenseSpec>(&layer)) {
      // Softmax heads receive the logit gradient directly.
      const Activation act = d->activation == Activation::kSoftmax ? Activation::kNone : d->activation;
      const Tensor& out = last ? trace.logits : trace.outputs[ii];
      dense_backward(in, out, grad, state.params[ii].weights, act, gp ? &gp->weights : nullptr,
                     gp ? &gp->bias : nullptr, need_input ? &grad_in : nullptr);
    } else {
      const auto& scale = trace.dropout_scale[ii];
      grad_in = grad;
      if (scale.size() == grad.size()) {
        for (std::size_t k = 0; k < grad.size(); ++k) grad_in[k] *= scale[k];
      }
    }
    if (last && std::find(options.capture_layers.begin(), options.capture_layers.end(), ii) !=
                    options.capture_layers.end()) {
      result.activations[ii] = grad;
    }
    if (ii == stop) break;
    grad = std::move(grad_in);
  }
  return result;
}

int argmax(std::span<const float> values) {
  int best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = static_cast<int>(i);
  }
  return best;
}

Prediction predict(const NetworkState& state, const Tensor& image) {
  const ForwardTrace trace = forward(state, image, Mode::kInference);
  Prediction p;
  const auto& probs = trace.probabilities();
  p.probabilities.assign(probs.values().begin(), probs.values().end());
  p.label = argmax(p.probabilities);
  return p;
}

}  // namespace gradlens::nn
