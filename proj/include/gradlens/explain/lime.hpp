#pragma once

#include <cstdint>
#include <vector>

#include "gradlens/explain/attribution.hpp"
#include "gradlens/explain/model.hpp"

namespace gradlens::explain {

struct LimeFit {
  std::vector<double> coefficients;  // ridge solution for every feature
  double intercept = 0.0;
  std::vector<int> selected;         // top-k features by |coefficient|, descending
  std::vector<double> per_segment;   // coefficients of selected features, zero elsewhere
};

struct LimeOptions {
  int samples = 1000;
  double kernel_width = 0.0;  // 0 selects 0.25 * sqrt(F)
  int top_k = 10;
  double ridge_lambda = 1e-3;
  std::uint64_t seed = 0;
  int jobs = 1;
};

// exp(-(1 - cos)^2 / width^2) with cos the cosine similarity to all-ones.
double lime_proximity(int on_count, int features, double kernel_width);

// Bernoulli(0.5) perturbations of F features.
std::vector<std::vector<std::uint8_t>> lime_perturbations(int features, int samples, std::uint64_t seed);

// Fits output `target` of f around the all-on point.
LimeFit lime_fit(const CoalitionFn& f, int features, int target, const LimeOptions& options);

Attribution lime_explain(const BlackBox& model, const Tensor& image, const seg::SegmentationMap& seg,
                         int target_class, const ExplainerConfig& config);

}  // namespace gradlens::explain
