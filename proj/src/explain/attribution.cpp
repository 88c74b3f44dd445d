#include "gradlens/explain/attribution.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gradlens/text.hpp"

namespace gradlens::explain {

const char* method_name(Method method) {
  switch (method) {
    case Method::kGradCam:
      return "gradcam";
    case Method::kKernelShap:
      return "kernel_shap";
    case Method::kLime:
      return "lime";
    case Method::kExactShapley:
      return "exact_shapley";
  }
  return "unknown";
}

std::optional<Method> parse_method(const std::string& name) {
  if (name == "gradcam" || name == "grad_cam") return Method::kGradCam;
  if (name == "kernel_shap" || name == "shap") return Method::kKernelShap;
  if (name == "lime") return Method::kLime;
  if (name == "exact_shapley") return Method::kExactShapley;
  return std::nullopt;
}

Heatmap upsample_bilinear(const Heatmap& map, int width, int height) {
  if (map.width < 2 || map.height < 2) throw std::invalid_argument("bilinear upsampling needs at least 2x2 cells");
  if (width < 1 || height < 1) throw std::invalid_argument("target size must be positive");
  Heatmap out(width, height);
  const double sx = width > 1 ? static_cast<double>(map.width - 1) / (width - 1) : 0.0;
  const double sy = height > 1 ? static_cast<double>(map.height - 1) / (height - 1) : 0.0;
  for (int y = 0; y < height; ++y) {
    const double fy = y * sy;
    const int y0 = std::min(static_cast<int>(fy), map.height - 2);
    const double ty = fy - y0;
    for (int x = 0; x < width; ++x) {
      const double fx = x * sx;
      const int x0 = std::min(static_cast<int>(fx), map.width - 2);
      const double tx = fx - x0;
      const double top = (1 - tx) * map.at(x0, y0) + tx * map.at(x0 + 1, y0);
      const double bottom = (1 - tx) * map.at(x0, y0 + 1) + tx * map.at(x0 + 1, y0 + 1);
      out.at(x, y) = static_cast<float>((1 - ty) * top + ty * bottom);
    }
  }
  return out;
}

Heatmap attribution_to_heatmap(const std::vector<double>& per_segment, const seg::SegmentationMap& seg) {
  if (seg.labels.empty()) throw std::invalid_argument("per-segment scores need a segmentation");
  if (per_segment.size() != static_cast<std::size_t>(seg.n_segments)) {
    throw std::invalid_argument(std::to_string(per_segment.size()) + " scores for " +
                                std::to_string(seg.n_segments) + " segments");
  }
  Heatmap out(seg.width, seg.height);
  for (std::size_t p = 0; p < seg.labels.size(); ++p) out.values[p] = static_cast<float>(per_segment[seg.labels[p]]);
  return out;
}

GrayHeatmap heatmap_to_gray(const Heatmap& map) {
  GrayHeatmap out;
  out.image = prep::GrayImage(map.width, map.height);
  if (map.values.empty()) return out;
  const auto [lo, hi] = std::minmax_element(map.values.begin(), map.values.end());
  out.min = *lo;
  out.max = *hi;
  if (out.max > out.min) {
    for (std::size_t i = 0; i < map.values.size(); ++i) {
      out.image.pixels[i] = static_cast<std::uint8_t>(std::lround((map.values[i] - out.min) / (out.max - out.min) * 255.0));
    }
  }
  return out;
}

std::string format_attribution(const Attribution& attr, const std::optional<GrayHeatmap>& mapping) {
  std::string out;
  const auto line = [&](const std::string& key, const std::string& value) { out += key + ": " + value + "\n"; };
  line("method", method_name(attr.method));
  line("class", std::to_string(attr.target_class));
  line("seed", std::to_string(attr.seed));
  line("base_value", attr.base_value ? format_double(*attr.base_value) : "n/a");
  line("ridge_fallback", attr.ridge_fallback ? "true" : "false");
  if (mapping) {
    line("heatmap_min", format_double(mapping->min));
    line("heatmap_max", format_double(mapping->max));
    line("heatmap_mapping", "linear min..max to 0..255");
  }
  line("segments", std::to_string(attr.per_segment.size()));
  for (std::size_t i = 0; i < attr.per_segment.size(); ++i) {
    line("score_" + std::to_string(i), format_double(attr.per_segment[i]));
  }
  line("runtime_seconds", format_double(attr.runtime_seconds));
  line("nondeterministic", "runtime_seconds");
  return out;
}

}  // namespace gradlens::explain
