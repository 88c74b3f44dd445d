#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "gradlens/nn/network.hpp"
#include "gradlens/seg/slic.hpp"
#include "gradlens/tensor.hpp"

namespace gradlens::explain {

// Class outputs of a model for one image. Must be safe to call concurrently.
using BlackBox = std::function<std::vector<double>(const Tensor&)>;

// All model outputs for a coalition of "on" features.
using CoalitionFn = std::function<std::vector<double>(std::span<const std::uint8_t>)>;

// Inference-mode softmax probabilities of the network.
BlackBox probability_model(const nn::NetworkState& state);

// Masks the image per coalition and queries the model.
CoalitionFn image_coalitions(const BlackBox& model, const Tensor& image, const seg::SegmentationMap& seg,
                             seg::BaselineMode baseline);

// Evaluates every coalition; results are stored by index, so `jobs` never
// changes the outcome.
std::vector<std::vector<double>> evaluate_coalitions(const CoalitionFn& f,
                                                     const std::vector<std::vector<std::uint8_t>>& coalitions,
                                                     int jobs);

}  // namespace gradlens::explain
