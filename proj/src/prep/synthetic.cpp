#include "gradlens/prep/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "gradlens/rng.hpp"

namespace gradlens::prep {

ProcessedSample synthetic_sample(int label, int index, const SyntheticConfig& config) {
  const int n = config.side;
  const int id_number = index * 3 + label;
  char id[32];
  std::snprintf(id, sizeof(id), "syn%04d", id_number);
  Rng rng(derive_seed(derive_seed(config.seed, "synthetic"), static_cast<std::uint64_t>(id_number)));

  // Background: a few low-frequency waves plus pixel noise.
  struct Wave {
    double fx, fy, phase, amp;
  };
  std::array<Wave, 3> waves{};
  for (auto& w : waves) {
    w = {rng.uniform(0.005, 0.03), rng.uniform(0.005, 0.03), rng.uniform(0.0, 2 * std::numbers::pi),
         rng.uniform(0.03, 0.08)};
  }
  const double level = rng.uniform(0.2, 0.35);

  // Lesion geometry, radius as a function of angle.
  const double cx = rng.uniform(0.3 * n, 0.7 * n), cy = rng.uniform(0.3 * n, 0.7 * n);
  const double r0 = rng.uniform(0.09 * n, 0.18 * n);
  std::array<double, 5> amp{}, phase{};
  for (std::size_t k = 0; k < amp.size(); ++k) {
    amp[k] = rng.uniform(0.12, 0.3);
    phase[k] = rng.uniform(0.0, 2 * std::numbers::pi);
  }
  const double brightness = rng.uniform(0.3, 0.45);

  ProcessedSample s;
  s.id = id;
  s.label = label;
  s.image = Tensor({n, n, 3});
  if (label != 0) s.lesion_mask.assign(static_cast<std::size_t>(n) * n, 0);
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      double v = level + 0.03 * (rng.uniform() - 0.5);
      for (const auto& w : waves) v += w.amp * std::sin(w.fx * x + w.fy * y + w.phase);
      if (label != 0) {
        const double dx = x + 0.5 - cx, dy = y + 0.5 - cy;
        double radius = r0;
        if (label == 2) {
          const double theta = std::atan2(dy, dx);
          double m = 1.0;
          for (std::size_t k = 0; k < amp.size(); ++k) m += amp[k] * std::sin((k + 3) * theta + phase[k]);
          radius = r0 * std::max(0.3, m);
        }
        if (dx * dx + dy * dy <= radius * radius) {
          v += brightness;
          s.lesion_mask[static_cast<std::size_t>(y) * n + x] = 1;
        }
      }
      const float f = static_cast<float>(std::clamp(v, 0.0, 1.0));
      float* p = &s.image.at(y, x, 0);
      p[0] = p[1] = p[2] = f;
    }
  }
  return s;
}

std::vector<ProcessedSample> synthetic_dataset(const SyntheticConfig& config) {
  std::vector<ProcessedSample> out;
  out.reserve(static_cast<std::size_t>(config.per_class) * 3);
  for (int i = 0; i < config.per_class; ++i) {
    for (int label = 0; label < 3; ++label) out.push_back(synthetic_sample(label, i, config));
  }
  return out;
}

}  // namespace gradlens::prep
