#pragma once

#include <array>
#include <span>

#include "gradlens/tensor.hpp"

namespace gradlens::nn {

inline constexpr int kNumClasses = 3;
using ClassWeights = std::array<double, kNumClasses>;

struct LossResult {
  double loss = 0.0;
  Tensor grad_logits;
};

// loss = -w[label] * ln(max(probs[label], 1e-12)); the logit gradient is
// w[label] * (probs - onehot(label)).
LossResult weighted_cross_entropy(const Tensor& probs, int label, std::span<const double> class_weights);

}  // namespace gradlens::nn
