#include "gradlens/explain/gradcam.hpp"

#include <algorithm>
#include <chrono>
#include <stdexcept>
#include <string>

namespace gradlens::explain {

std::size_t last_conv_layer(const nn::NetworkSpec& spec) {
  for (std::size_t i = spec.layers.size(); i-- > 0;) {
    if (nn::is_conv(spec.layers[i])) return i;
  }
  throw std::invalid_argument("network has no convolutional layer");
}

GradCamMaps grad_cam_maps(const nn::NetworkState& state, const Tensor& image, int target_class, std::size_t layer) {
  if (layer >= state.spec.layers.size() || !nn::is_conv(state.spec.layers[layer])) {
    throw std::invalid_argument("Grad-CAM layer " + std::to_string(layer) + " is not a convolution");
  }
  const auto trace = nn::forward(state, image, nn::Mode::kInference);
  if (target_class < 0 || static_cast<std::size_t>(target_class) >= trace.logits.size()) {
    throw std::invalid_argument("class " + std::to_string(target_class) + " is not a network output");
  }
  Tensor onehot(trace.logits.shape());
  onehot[target_class] = 1.0f;
  nn::BackpropOptions opt;
  opt.parameter_gradients = false;
  opt.capture_layers = {layer};
  const auto grads = nn::backprop(state, trace, onehot, opt);
  const Tensor& g = grads.activations.at(layer);

  GradCamMaps out;
  out.activation = trace.outputs[layer];
  const int h = out.activation.dim(0), w = out.activation.dim(1), k = out.activation.dim(2);
  out.alpha.assign(k, 0.0);
  for (std::size_t p = 0; p < static_cast<std::size_t>(h) * w; ++p) {
    for (int c = 0; c < k; ++c) out.alpha[c] += g[p * k + c];
  }
  for (double& a : out.alpha) a /= static_cast<double>(h) * w;
  out.cam = Heatmap(w, h);
  for (std::size_t p = 0; p < static_cast<std::size_t>(h) * w; ++p) {
    double s = 0.0;
    for (int c = 0; c < k; ++c) s += out.alpha[c] * out.activation[p * k + c];
    out.cam.values[p] = static_cast<float>(std::max(0.0, s));
  }
  return out;
}

Attribution grad_cam(const nn::NetworkState& state, const Tensor& image, int target_class) {
  return grad_cam(state, image, target_class, last_conv_layer(state.spec));
}

Attribution grad_cam(const nn::NetworkState& state, const Tensor& image, int target_class, std::size_t layer) {
  const auto start = std::chrono::steady_clock::now();
  const auto maps = grad_cam_maps(state, image, target_class, layer);
  Heatmap map = upsample_bilinear(maps.cam, state.spec.input.w, state.spec.input.h);
  const float peak = *std::max_element(map.values.begin(), map.values.end());
  if (peak > 0.0f) {
    for (float& v : map.values) v /= peak;
  }
  Attribution a;
  a.method = Method::kGradCam;
  a.target_class = target_class;
  a.heatmap = std::move(map);
  a.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return a;
}

}  // namespace gradlens::explain
