#include "gradlens/explain/model.hpp"

#include "gradlens/parallel.hpp"

namespace gradlens::explain {

BlackBox probability_model(const nn::NetworkState& state) {
  const nn::NetworkState* s = &state;
  return [s](const Tensor& image) {
    const auto p = nn::predict(*s, image);
    return std::vector<double>(p.probabilities.begin(), p.probabilities.end());
  };
}

CoalitionFn image_coalitions(const BlackBox& model, const Tensor& image, const seg::SegmentationMap& seg,
                             seg::BaselineMode baseline) {
  Tensor fill = seg::baseline_image(image, seg, baseline);
  return [model, image, seg, fill = std::move(fill)](std::span<const std::uint8_t> on_off) {
    return model(seg::mask_image(image, seg, on_off, fill));
  };
}

std::vector<std::vector<double>> evaluate_coalitions(const CoalitionFn& f,
                                                     const std::vector<std::vector<std::uint8_t>>& coalitions,
                                                     int jobs) {
  std::vector<std::vector<double>> out(coalitions.size());
  parallel_for(coalitions.size(), jobs, [&](std::size_t i) { out[i] = f(coalitions[i]); });
  return out;
}

}  // namespace gradlens::explain
