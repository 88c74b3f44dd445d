#pragma once
#include <cstdint>
#include <vector>

#include "gradlens/prep/image.hpp"
#include "gradlens/prep/mias.hpp"
#include "gradlens/tensor.hpp"

namespace gradlens::prep {

inline constexpr int kSampleSide = 224;
inline constexpr int kNormalCropSide = 448;

// Bilinear resize with the align-corners-false convention:
// src = (dst + 0.5) * in / out - 0.5, clamped to the image.
GrayImage resize_bilinear(const GrayImage& image, int width, int height);

// Square window of side `side` with top-left corner (x0, y0); pixels outside
// the image are zero.
GrayImage crop_padded(const GrayImage& image, int x0, int y0, int side);

struct Crop {
  GrayImage image;                   // kSampleSide x kSampleSide
  std::vector<std::uint8_t> lesion;  // kSampleSide^2 disk mask, empty for normals
};

// Square of side 2r around the lesion (y measured from the bottom edge),
// resized to 224x224 together with the lesion disk.
Crop extract_roi(const GrayImage& image, const Roi& roi);

// Integer centroid of the nonzero mask pixels.
struct Point {
  int x = 0;
  int y = 0;
};
Point mask_centroid(const GrayImage& mask);

// 448-pixel square centered on the breast-mask centroid, resized to 224x224.
Crop central_crop_normal(const GrayImage& image, const GrayImage& mask);

// Gray levels scaled to [0,1] and replicated over three channels.
Tensor to_tensor(const GrayImage& image);

}  // namespace gradlens::prep
