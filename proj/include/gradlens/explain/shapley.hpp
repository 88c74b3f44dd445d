#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "gradlens/explain/attribution.hpp"
#include "gradlens/explain/model.hpp"

namespace gradlens::explain {

// Model output of one class for a coalition of "on" features.
using ScalarCoalitionFn = std::function<double(std::span<const std::uint8_t>)>;

inline constexpr int kMaxExactFeatures = 20;

// Exhaustive Shapley values over all 2^F coalitions.
std::vector<double> exact_shapley(const ScalarCoalitionFn& f, int features);

// (F - 1) / (C(F, s) * s * (F - s)); sizes 0 and F are constraints, not weights.
double shap_kernel_weight(int features, int size);

struct CoalitionSample {
  std::vector<std::uint8_t> on_off;
  double weight = 0.0;  // regression weight; unused for all-on and all-off
};

// All-on and all-off first, then complete subset sizes outward from 1 and
// F - 1 while the budget allows, then paired random draws from the remaining
// sizes sharing their kernel mass equally.
std::vector<CoalitionSample> shap_coalitions(int features, int budget, std::uint64_t seed);

struct ShapSolution {
  std::vector<std::vector<double>> phi;  // [output][feature]
  std::vector<double> base;              // f(all-off) per output
  std::vector<double> full;              // f(all-on) per output
  bool ridge_fallback = false;
};

// Weighted least squares with sum(phi) = f(all-on) - f(all-off) enforced by
// eliminating the last feature. values[k] holds the outputs for samples[k].
ShapSolution solve_kernel_shap(const std::vector<CoalitionSample>& samples,
                               const std::vector<std::vector<double>>& values, double ridge_lambda);

ShapSolution kernel_shap_coalitions(const CoalitionFn& f, int features, int budget, std::uint64_t seed,
                                    double ridge_lambda, int jobs = 1);

// One attribution per model output, probability outputs of the classifier.
std::vector<Attribution> kernel_shap(const BlackBox& model, const Tensor& image, const seg::SegmentationMap& seg,
                                     const ExplainerConfig& config);

}  // namespace gradlens::explain
