#pragma once

#include <cstddef>
#include <vector>

#include "gradlens/explain/attribution.hpp"
#include "gradlens/nn/network.hpp"

namespace gradlens::explain {

// Index of the network's last convolution.
std::size_t last_conv_layer(const nn::NetworkSpec& spec);

struct GradCamMaps {
  std::vector<double> alpha;  // mean logit gradient per feature map
  Tensor activation;          // (h, w, k) output of the chosen layer
  Heatmap cam;                // ReLU(sum_k alpha_k A^k) at layer resolution
};

// Class score is the pre-softmax logit of `target_class`.
GradCamMaps grad_cam_maps(const nn::NetworkState& state, const Tensor& image, int target_class, std::size_t layer);

// Upsampled to the input size and divided by its maximum when positive.
Attribution grad_cam(const nn::NetworkState& state, const Tensor& image, int target_class);
Attribution grad_cam(const nn::NetworkState& state, const Tensor& image, int target_class, std::size_t layer);

}  // namespace gradlens::explain
