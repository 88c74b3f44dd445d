#pragma once
// Closed-form black boxes over coalition indicators.
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "gradlens/explain/model.hpp"
#include "gradlens/rng.hpp"

namespace gradlens::testing {

namespace ex = gradlens::explain;

// Small random two-layer network over the coalition indicators.
inline ex::CoalitionFn random_mlp(int features, std::uint64_t seed, int outputs = 1) {
  Rng rng(seed);
  const int hidden = 6;
  std::vector<double> w1(features * hidden), b1(hidden), w2(hidden * outputs), b2(outputs);
  for (auto* v : {&w1, &b1, &w2, &b2})
    for (double& x : *v) x = rng.normal();
  return [=](std::span<const std::uint8_t> z) {
    std::vector<double> h(hidden);
    for (int j = 0; j < hidden; ++j) {
      double s = b1[j];
      for (int i = 0; i < features; ++i) s += z[i] * w1[i * hidden + j];
      h[j] = std::tanh(s);
    }
    std::vector<double> out(outputs);
    for (int o = 0; o < outputs; ++o) {
      out[o] = b2[o];
      for (int j = 0; j < hidden; ++j) out[o] += h[j] * w2[j * outputs + o];
    }
    return out;
  };
}

inline ex::CoalitionFn additive(std::vector<double> w, double bias = 0.0) {
  return [w, bias](std::span<const std::uint8_t> z) {
    double s = bias;
    for (std::size_t i = 0; i < w.size(); ++i) s += z[i] * w[i];
    return std::vector<double>{s};
  };
}

}  // namespace gradlens::testing
