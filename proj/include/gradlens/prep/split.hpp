#pragma once
#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace gradlens::prep {

enum class Split { kTrain = 0, kValidation = 1, kTest = 2 };

struct SplitFractions {
  double train = 0.70;
  double validation = 0.15;
  double test = 0.15;
};

struct LabeledId {
  std::string id;
  int label = 0;
};

struct SplitManifest {
  std::array<std::vector<std::string>, 3> ids;         // indexed by Split
  std::array<std::array<int, 3>, 3> class_counts{};    // [split][class]
  std::uint64_t seed = 0;

  const std::vector<std::string>& of(Split s) const { return ids[static_cast<int>(s)]; }
};

// Largest-remainder allocation of n items over the fractions. Equal
// remainders favor the later split.
std::array<int, 3> allocate(int n, const SplitFractions& fractions);

// Per class: ids sorted, shuffled from the seed, then cut into train,
// validation and test by allocate().
SplitManifest stratified_split(const std::vector<LabeledId>& items, const SplitFractions& fractions,
                               std::uint64_t seed, int num_classes = 3);

// Indices (ascending) of a subset with every class downsampled uniformly at
// random to the smallest class count.
std::vector<std::size_t> balance_classes(const std::vector<int>& labels, std::uint64_t seed, int num_classes = 3);

}  // namespace gradlens::prep
