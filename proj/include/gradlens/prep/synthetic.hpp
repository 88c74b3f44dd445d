#pragma once
#include <cstdint>
#include <vector>

#include "gradlens/prep/sample.hpp"

namespace gradlens::prep {

// Three-class stand-in for the mammography crops: textured background only
// (normal), a filled disk (benign) or an irregular spiculated blob
// (malignant). Lesion masks mark the disk or blob.
struct SyntheticConfig {
  int per_class = 150;
  int side = 224;
  std::uint64_t seed = 0;
};

ProcessedSample synthetic_sample(int label, int index, const SyntheticConfig& config);

// Ids "syn0000", "syn0001", ... with labels cycling 0, 1, 2.
std::vector<ProcessedSample> synthetic_dataset(const SyntheticConfig& config);

}  // namespace gradlens::prep
