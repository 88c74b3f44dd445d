#pragma once

#include <cstdint>
#include <vector>

#include "gradlens/nn/network.hpp"
#include "gradlens/tensor.hpp"

namespace gradlens::nn {

struct AdamConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct OptimizerState {
  AdamConfig config;
  std::int64_t step = 0;
  std::vector<Tensor> first_moment;
  std::vector<Tensor> second_moment;
};

// Moments are created lazily on the first step to match the parameter list.
void adam_step(OptimizerState& opt, std::span<Tensor* const> params, std::span<const Tensor* const> grads);

// Flattened views of every weight and bias tensor, in layer order.
std::vector<Tensor*> parameter_tensors(std::vector<LayerParams>& params);
std::vector<const Tensor*> parameter_tensors(const std::vector<LayerParams>& params);

}  // namespace gradlens::nn
