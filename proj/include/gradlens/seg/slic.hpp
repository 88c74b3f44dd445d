#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <stdexcept>
#include <vector>

#include "gradlens/prep/image.hpp"
#include "gradlens/tensor.hpp"

namespace gradlens::seg {

struct SlicConfig {
  int target_segments = 100;
  double compactness = 1.0;
  int max_iterations = 1000;
  double epsilon = 1e-4;  // stop when the mean center shift drops below this
  int jobs = 1;
};

struct SegmentationMap {
  int width = 0;
  int height = 0;
  std::vector<int> labels;  // row-major, ids 0..n_segments-1
  int n_segments = 0;

  int at(int x, int y) const { return labels[static_cast<std::size_t>(y) * width + x]; }
  std::vector<std::size_t> sizes() const;
  friend bool operator==(const SegmentationMap&, const SegmentationMap&) = default;
};

// Grid spacing S = sqrt(pixels / target_segments).
double grid_spacing(int width, int height, int target_segments);

// Seed positions (x, y) after the lowest-gradient perturbation.
struct Seed {
  double x = 0.0;
  double y = 0.0;
};
std::vector<Seed> slic_seeds(const Tensor& image, int target_segments);

// Input is (h, w, c) in [0, 1]; clustering uses the channel mean.
SegmentationMap slic_segment(const Tensor& image, const SlicConfig& config = {});

// Relabels ids contiguously in scan order and recounts segments.
SegmentationMap relabel_contiguous(int width, int height, const std::vector<int>& labels);

enum class BaselineMode { kImageMean, kZero, kSegmentMean };

// Image holding, for every pixel, the value an "off" segment takes there.
Tensor baseline_image(const Tensor& image, const SegmentationMap& seg, BaselineMode mode = BaselineMode::kImageMean);

// Copies image, replacing pixels of segments with on_off[i] == 0 by baseline.
Tensor mask_image(const Tensor& image, const SegmentationMap& seg, std::span<const std::uint8_t> on_off,
                  const Tensor& baseline);
Tensor mask_image(const Tensor& image, const SegmentationMap& seg, std::span<const std::uint8_t> on_off,
                  BaselineMode mode = BaselineMode::kImageMean);

// Sorted neighbor lists over 4-connected label boundaries.
std::vector<std::vector<int>> segment_adjacency(const SegmentationMap& seg);

// Label image, one gray level per segment id; at most 256 segments.
prep::GrayImage to_gray(const SegmentationMap& seg);

// P5 with maxval n_segments - 1 (at least 1) and raw ids as pixel values.
std::string encode_segmentation(const SegmentationMap& seg);
SegmentationMap decode_segmentation(const std::string& bytes);
void save_segmentation(const SegmentationMap& seg, const std::filesystem::path& path);
SegmentationMap load_segmentation(const std::filesystem::path& path);

}  // namespace gradlens::seg
