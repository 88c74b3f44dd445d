#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "gradlens/tensor.hpp"

namespace gradlens::prep {

// One of the 16 augmentation variants: quarter turns (counterclockwise),
// then an optional vertical flip, then optional brightness/contrast jitter.
struct Recipe {
  int quarter_turns = 0;  // 0..3
  bool flip = false;
  bool jitter = false;

  int index() const { return (quarter_turns * 2 + (flip ? 1 : 0)) * 2 + (jitter ? 1 : 0); }
  static Recipe from_index(int index);
  bool is_identity() const { return quarter_turns == 0 && !flip && !jitter; }
  // e.g. "rot270+flip+jitter", "identity"
  std::string describe() const;
  friend bool operator==(const Recipe&, const Recipe&) = default;
};

inline constexpr int kRecipeCount = 16;

struct ProcessedSample {
  std::string id;
  int label = 0;
  Recipe recipe;
  Tensor image;                           // (224, 224, 3) in [0, 1]
  std::vector<std::uint8_t> lesion_mask;  // (224 * 224) 0/1, empty when unannotated

  bool has_lesion() const { return !lesion_mask.empty(); }
};

}  // namespace gradlens::prep
