#include "gradlens/nn/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace gradlens::nn {

void adam_step(OptimizerState& opt, std::span<Tensor* const> params, std::span<const Tensor* const> grads) {
  if (params.size() != grads.size()) throw std::invalid_argument("adam: parameter/gradient count mismatch");
  if (opt.first_moment.empty()) {
    for (const Tensor* p : params) {
      opt.first_moment.emplace_back(p->shape());
      opt.second_moment.emplace_back(p->shape());
    }
  }
  if (opt.first_moment.size() != params.size()) throw std::invalid_argument("adam: state/parameter mismatch");
  ++opt.step;
  const auto& c = opt.config;
  const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(opt.step));
  const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(opt.step));
  const float b1 = static_cast<float>(c.beta1), b2 = static_cast<float>(c.beta2);
  const float step_size = static_cast<float>(c.learning_rate / bc1);
  const float inv_bc2 = static_cast<float>(1.0 / bc2);
  const float eps = static_cast<float>(c.epsilon);
  for (std::size_t k = 0; k < params.size(); ++k) {
    Tensor& p = *params[k];
    const Tensor& g = *grads[k];
    if (!p.same_shape(g) || !p.same_shape(opt.first_moment[k])) {
      throw std::invalid_argument("adam: shape mismatch at parameter " + std::to_string(k));
    }
    float* m = opt.first_moment[k].data();
    float* v = opt.second_moment[k].data();
    float* w = p.data();
    const float* gd = g.data();
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = b1 * m[i] + (1.0f - b1) * gd[i];
      v[i] = b2 * v[i] + (1.0f - b2) * gd[i] * gd[i];
      w[i] -= step_size * m[i] / (std::sqrt(v[i] * inv_bc2) + eps);
    }
  }
}

std::vector<Tensor*> parameter_tensors(std::vector<LayerParams>& params) {
  std::vector<Tensor*> out;
  for (auto& p : params) {
    if (p.weights.empty()) continue;
    out.push_back(&p.weights);
    out.push_back(&p.bias);
  }
  return out;
}

std::vector<const Tensor*> parameter_tensors(const std::vector<LayerParams>& params) {
  std::vector<const Tensor*> out;
  for (const auto& p : params) {
    if (p.weights.empty()) continue;
    out.push_back(&p.weights);
    out.push_back(&p.bias);
  }
  return out;
}

}  // namespace gradlens::nn
