#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gradlens/prep/image.hpp"
#include "gradlens/seg/slic.hpp"

namespace gradlens::explain {

enum class Method { kGradCam, kKernelShap, kLime, kExactShapley };

const char* method_name(Method method);
// Accepts "gradcam", "kernel_shap" (or "shap"), "lime", "exact_shapley".
std::optional<Method> parse_method(const std::string& name);

struct Heatmap {
  int width = 0;
  int height = 0;
  std::vector<float> values;  // row-major

  Heatmap() = default;
  Heatmap(int w, int h, float fill = 0.0f) : width(w), height(h), values(static_cast<std::size_t>(w) * h, fill) {}
  float& at(int x, int y) { return values[static_cast<std::size_t>(y) * width + x]; }
  float at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
  friend bool operator==(const Heatmap&, const Heatmap&) = default;
};

struct Attribution {
  Method method = Method::kGradCam;
  int target_class = 0;
  std::vector<double> per_segment;  // empty for Grad-CAM
  Heatmap heatmap;                  // empty for per-segment methods until rendered
  std::optional<double> base_value;
  double runtime_seconds = 0.0;
  std::uint64_t seed = 0;
  bool ridge_fallback = false;
};

struct ExplainerConfig {
  int shap_samples = 512;
  int lime_samples = 1000;
  double lime_kernel_width = 0.0;  // 0 selects 0.25 * sqrt(F)
  int lime_top_k = 10;
  double ridge_lambda = 1e-3;
  seg::BaselineMode baseline = seg::BaselineMode::kImageMean;
  std::uint64_t seed = 0;
  int jobs = 1;
};

// Corner-aligned bilinear resampling; the source needs at least 2x2 cells.
Heatmap upsample_bilinear(const Heatmap& map, int width, int height);

// Paints every pixel with its segment's score.
Heatmap attribution_to_heatmap(const std::vector<double>& per_segment, const seg::SegmentationMap& seg);

// Linear min..max to 0..255 mapping; a flat map becomes all zeros.
struct GrayHeatmap {
  prep::GrayImage image;
  double min = 0.0;
  double max = 0.0;
};
GrayHeatmap heatmap_to_gray(const Heatmap& map);

// "key: value" lines in a fixed order. Timing is marked non-deterministic.
std::string format_attribution(const Attribution& attr, const std::optional<GrayHeatmap>& mapping = std::nullopt);

}  // namespace gradlens::explain
