#include "gradlens/nn/loss.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace gradlens::nn {

LossResult weighted_cross_entropy(const Tensor& probs, int label, std::span<const double> class_weights) {
  if (label < 0 || static_cast<std::size_t>(label) >= probs.size()) {
    throw std::invalid_argument("label " + std::to_string(label) + " outside [0, " +
                                std::to_string(probs.size()) + ")");
  }
  if (class_weights.size() < probs.size()) {
    throw std::invalid_argument("class weights do not cover every class");
  }
  const double w = class_weights[label];
  const double p = std::max(static_cast<double>(probs[label]), 1e-12);
  LossResult r;
  r.loss = -w * std::log(p);
  r.grad_logits = Tensor(probs.shape());
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double onehot = static_cast<int>(i) == label ? 1.0 : 0.0;
    r.grad_logits[i] = static_cast<float>(w * (probs[i] - onehot));
  }
  return r;
}

}  // namespace gradlens::nn
