#include "gradlens/prep/augment.hpp"

#include <algorithm>
#include <cstring>
#include <stdexcept>
#include <string_view>
#include <unordered_map>

#include "gradlens/rng.hpp"

namespace gradlens::prep {

Recipe Recipe::from_index(int index) {
  if (index < 0 || index >= kRecipeCount) throw std::out_of_range("recipe index " + std::to_string(index));
  return {index / 4, (index / 2) % 2 == 1, index % 2 == 1};
}

std::string Recipe::describe() const {
  if (is_identity()) return "identity";
  std::string s = "rot" + std::to_string(quarter_turns * 90);
  if (flip) s += "+flip";
  if (jitter) s += "+jitter";
  return s;
}

Jitter jitter_draw(std::uint64_t seed, const std::string& id, const Recipe& recipe) {
  Rng rng(derive_seed(derive_seed(derive_seed(seed, "augment"), id), static_cast<std::uint64_t>(recipe.index())));
  Jitter j;
  j.contrast = rng.uniform(0.5, 1.5);
  j.brightness = rng.uniform(-15.0, 15.0);
  return j;
}

namespace {

// Source coordinate of output pixel (x, y) for a square of side n.
inline void source_xy(const Recipe& r, int n, int x, int y, int& sx, int& sy) {
  if (r.flip) y = n - 1 - y;
  // Counterclockwise quarter turn: out(y, x) = in(x, n - 1 - y).
  for (int t = 0; t < r.quarter_turns; ++t) {
    const int ny = x, nx = n - 1 - y;
    x = nx;
    y = ny;
  }
  sx = x;
  sy = y;
}

}  // namespace

ProcessedSample apply_recipe(const ProcessedSample& base, const Recipe& recipe, std::uint64_t seed) {
  const Tensor& in = base.image;
  if (in.rank() != 3 || in.dim(0) != in.dim(1)) throw std::invalid_argument("augment: image must be square (h, w, c)");
  const int n = in.dim(0), c = in.dim(2);
  ProcessedSample out;
  out.id = base.id;
  out.label = base.label;
  out.recipe = recipe;
  out.image = Tensor(in.shape());
  if (base.has_lesion()) out.lesion_mask.assign(base.lesion_mask.size(), 0);
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      int sx = 0, sy = 0;
      source_xy(recipe, n, x, y, sx, sy);
      const std::size_t dst = static_cast<std::size_t>(y) * n + x;
      const std::size_t src = static_cast<std::size_t>(sy) * n + sx;
      std::memcpy(out.image.data() + dst * c, in.data() + src * c, sizeof(float) * c);
      if (base.has_lesion()) out.lesion_mask[dst] = base.lesion_mask[src];
    }
  }
  if (recipe.jitter) {
    const Jitter j = jitter_draw(seed, base.id, recipe);
    const float gamma = static_cast<float>(j.contrast);
    const float delta = static_cast<float>(j.brightness / 255.0);
    for (auto& v : out.image.values()) v = std::clamp(gamma * v + delta, 0.0f, 1.0f);
  }
  return out;
}

std::vector<ProcessedSample> augment(const ProcessedSample& base, std::uint64_t seed) {
  std::vector<ProcessedSample> out;
  out.reserve(kRecipeCount);
  for (int r = 0; r < kRecipeCount; ++r) out.push_back(apply_recipe(base, Recipe::from_index(r), seed));
  return out;
}

AugmentedSet augment_dataset(std::span<const ProcessedSample> bases, std::uint64_t seed) {
  AugmentedSet set;
  std::unordered_map<std::size_t, std::vector<std::size_t>> by_hash;  // hash -> positions in set.items
  const auto bytes = [](const Tensor& t) {
    return std::string_view(reinterpret_cast<const char*>(t.data()), t.size() * sizeof(float));
  };
  for (std::size_t s = 0; s < bases.size(); ++s) {
    const auto variants = augment(bases[s], seed);
    for (const auto& v : variants) {
      const std::size_t h = std::hash<std::string_view>{}(bytes(v.image));
      auto& bucket = by_hash[h];
      bool dup = false;
      for (std::size_t pos : bucket) {
        const AugmentedRef& prev = set.items[pos];
        const Tensor earlier = prev.source == s ? variants[prev.recipe.index()].image
                                                : apply_recipe(bases[prev.source], prev.recipe, seed).image;
        if (bytes(earlier) == bytes(v.image)) {
          dup = true;
          break;
        }
      }
      if (dup) {
        ++set.duplicates;
        continue;
      }
      bucket.push_back(set.items.size());
      set.items.push_back({s, v.recipe});
    }
  }
  return set;
}

}  // namespace gradlens::prep
