#include "gradlens/prep/split.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <stdexcept>

#include "gradlens/rng.hpp"

namespace gradlens::prep {

std::array<int, 3> allocate(int n, const SplitFractions& f) {
  const std::array<double, 3> frac = {f.train, f.validation, f.test};
  double total = 0.0;
  for (double v : frac) {
    if (!(v >= 0.0)) throw std::invalid_argument("split fractions must be non-negative");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("split fractions must sum to 1");
  std::array<int, 3> count{};
  std::array<double, 3> rem{};
  int assigned = 0;
  for (int k = 0; k < 3; ++k) {
    const double q = n * frac[k];
    count[k] = static_cast<int>(std::floor(q));
    rem[k] = q - count[k];
    assigned += count[k];
  }
  // Remainders within rounding noise tie; ties favor the later split.
  std::array<int, 3> order = {2, 1, 0};
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return rem[a] > rem[b] + 1e-9; });
  for (int i = 0; assigned < n; ++i, ++assigned) ++count[order[i % 3]];
  return count;
}

SplitManifest stratified_split(const std::vector<LabeledId>& items, const SplitFractions& fractions,
                               std::uint64_t seed, int num_classes) {
  SplitManifest m;
  m.seed = seed;
  std::vector<std::vector<std::string>> by_class(num_classes);
  for (const auto& it : items) {
    if (it.label < 0 || it.label >= num_classes) throw std::invalid_argument("label out of range for " + it.id);
    by_class[it.label].push_back(it.id);
  }
  for (int c = 0; c < num_classes; ++c) {
    auto& ids = by_class[c];
    if (ids.empty()) throw std::invalid_argument("class " + std::to_string(c) + " has no samples");
    std::sort(ids.begin(), ids.end());
    if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) throw std::invalid_argument("duplicate sample id");
    Rng rng(derive_seed(derive_seed(seed, "split"), static_cast<std::uint64_t>(c)));
    rng.shuffle(std::span(ids));
    const auto count = allocate(static_cast<int>(ids.size()), fractions);
    std::size_t pos = 0;
    for (int s = 0; s < 3; ++s) {
      for (int k = 0; k < count[s]; ++k) m.ids[s].push_back(ids[pos++]);
      if (c < 3) m.class_counts[s][c] = count[s];
    }
  }
  return m;
}

std::vector<std::size_t> balance_classes(const std::vector<int>& labels, std::uint64_t seed, int num_classes) {
  std::vector<std::vector<std::size_t>> by_class(num_classes);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= num_classes) throw std::invalid_argument("label out of range");
    by_class[labels[i]].push_back(i);
  }
  std::size_t target = labels.size();
  for (int c = 0; c < num_classes; ++c) {
    if (by_class[c].empty()) throw std::invalid_argument("class " + std::to_string(c) + " has no samples");
    target = std::min(target, by_class[c].size());
  }
  std::vector<std::size_t> keep;
  for (int c = 0; c < num_classes; ++c) {
    auto& idx = by_class[c];
    Rng rng(derive_seed(derive_seed(seed, "balance"), static_cast<std::uint64_t>(c)));
    rng.shuffle(std::span(idx));
    keep.insert(keep.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(target));
  }
  std::sort(keep.begin(), keep.end());
  return keep;
}

}  // namespace gradlens::prep
