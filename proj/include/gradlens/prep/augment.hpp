#pragma once
#include <cstdint>
#include <span>
#include <vector>

#include "gradlens/prep/sample.hpp"

namespace gradlens::prep {

struct Jitter {
  double contrast = 1.0;    // gamma in (0.5, 1.5)
  double brightness = 0.0;  // delta in (-15, 15) gray levels
};

// Draw for (seed, sample id, recipe); independent of processing order.
Jitter jitter_draw(std::uint64_t seed, const std::string& id, const Recipe& recipe);

// Applies one recipe to a base (identity) sample, transforming the lesion
// mask with the same geometry.
ProcessedSample apply_recipe(const ProcessedSample& base, const Recipe& recipe, std::uint64_t seed);

// All 16 variants in recipe-index order.
std::vector<ProcessedSample> augment(const ProcessedSample& base, std::uint64_t seed);

struct AugmentedRef {
  std::size_t source = 0;  // index into the base samples
  Recipe recipe;
};

struct AugmentedSet {
  std::vector<AugmentedRef> items;
  std::size_t duplicates = 0;
};

// Enumerates every (source, recipe) pair and drops images byte-identical to
// an earlier one, keeping the first in source-then-recipe order.
AugmentedSet augment_dataset(std::span<const ProcessedSample> bases, std::uint64_t seed);

}  // namespace gradlens::prep
