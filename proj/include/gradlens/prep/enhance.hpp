#pragma once
#include <stdexcept>
#include <vector>

#include "gradlens/prep/image.hpp"

namespace gradlens::prep {

// Threshold t maximizing the between-class variance of {<= t} and {> t};
// ties resolve to the smallest t.
int otsu_threshold(const GrayImage& image);

struct ArtifactRemoval {
  GrayImage cleaned;
  GrayImage mask;  // 1 inside the breast region, 0 elsewhere
};

// Keeps the largest 8-connected component above the Otsu threshold and
// zeroes everything else (scanner labels, tape, background).
ArtifactRemoval remove_artifacts(const GrayImage& image);

struct ClaheConfig {
  int tiles_x = 8;
  int tiles_y = 8;
  double clip_limit = 2.0;
};

// Contrast-limited adaptive histogram equalization. Each tile's histogram is
// clipped at clip_limit times the mean bin height, the excess spread over
// all bins, and pixels blend the four nearest tile mappings bilinearly.
GrayImage clahe(const GrayImage& image, const ClaheConfig& config = {});

// Half-open pixel range of tile `index` out of `count` along an axis of
// length `length`.
inline int tile_begin(int index, int count, int length) {
  return static_cast<int>(static_cast<long long>(index) * length / count);
}

}  // namespace gradlens::prep
