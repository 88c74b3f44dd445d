#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gradlens/explain/attribution.hpp"
#include "gradlens/nn/network.hpp"
#include "gradlens/prep/image.hpp"
#include "gradlens/seg/slic.hpp"

namespace gradlens::eval {

// Mean wall-clock seconds per image, excluding one warm-up call on the first image.
double time_explainer(const std::function<void(const Tensor&)>& explain, const std::vector<Tensor>& images);

// Pearson correlation; zero-variance inputs give 1 when identical, else 0.
double pearson(std::span<const float> a, std::span<const float> b);

// Indices of the k largest |scores|, ties to the lower index.
std::vector<int> top_k_segments(const std::vector<double>& scores, int k);

double jaccard(const std::vector<int>& a, const std::vector<int>& b);

// Mean of the heatmap over each segment.
std::vector<double> segment_means(const explain::Heatmap& map, const seg::SegmentationMap& seg);

struct RobustnessScores {
  double correlation = 0.0;  // mean pairwise Pearson of heatmaps
  double top_k_jaccard = 0.0;  // mean pairwise Jaccard of top-k segments
};

// Requires at least two runs of equally sized heatmaps and score vectors.
RobustnessScores robustness(const std::vector<explain::Heatmap>& heatmaps,
                            const std::vector<std::vector<double>>& segment_scores, int k = 10);

// Linear-interpolation quantile (numpy's default) of the values.
double quantile(std::vector<float> values, double q);

// Pixels at or above the q-quantile and above the map minimum.
std::vector<std::uint8_t> binarize_heatmap(const explain::Heatmap& map, double q = 0.8);

// nullopt when both sets are empty.
std::optional<double> set_iou(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b);

// nullopt for an empty lesion mask.
std::optional<double> heatmap_iou(const explain::Heatmap& map, std::span<const std::uint8_t> lesion, double q = 0.8);

enum class Palette { kBlueRed, kSigned };

inline constexpr double kOverlayAlpha = 0.4;

// Image in [0, 1] (h, w, c); blue-red maps 0..1 to blue..red, signed maps
// positive to green and negative to red with opacity scaled by |v| / max |v|.
prep::RgbImage render_overlay(const Tensor& image, const explain::Heatmap& map, Palette palette);

struct BenchImage {
  std::string id;
  int label = 0;
  Tensor image;
  std::vector<std::uint8_t> lesion_mask;  // empty when unannotated
};

struct BenchConfig {
  explain::ExplainerConfig explainer;
  seg::SlicConfig slic;
  std::vector<explain::Method> methods = {explain::Method::kGradCam, explain::Method::kKernelShap,
                                          explain::Method::kLime};
  int robustness_runs = 5;
  double iou_quantile = 0.8;
  int top_k = 10;
  bool timing = true;
  bool robustness = true;
  bool iou = true;
};

struct MethodBench {
  explain::Method method = explain::Method::kGradCam;
  double seconds_per_image = 0.0;
  std::optional<RobustnessScores> robustness;
  std::optional<double> mean_iou;  // over annotated images
  int iou_images = 0;
};

struct BenchReport {
  std::vector<MethodBench> methods;
  int images = 0;
  int robustness_runs = 0;
  std::string robustness_image;
  // Grad-CAM < Kernel SHAP < LIME in mean seconds per image.
  std::optional<bool> ordering_holds;
};

// Explains the predicted class of each image. Robustness uses the first image.
BenchReport run_bench(const nn::NetworkState& state, const std::vector<BenchImage>& images, const BenchConfig& config);

std::string format_bench_report(const BenchReport& report);

}  // namespace gradlens::eval
