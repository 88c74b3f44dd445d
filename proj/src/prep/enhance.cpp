#include "gradlens/prep/enhance.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>

namespace gradlens::prep {

int otsu_threshold(const GrayImage& image) {
  std::array<double, 256> hist{};
  for (auto p : image.pixels) hist[p] += 1.0;
  const double total = static_cast<double>(image.pixels.size());
  double sum_all = 0.0;
  for (int i = 0; i < 256; ++i) sum_all += i * hist[i];
  double w0 = 0.0, sum0 = 0.0, best = -1.0;
  int best_t = 0;
  for (int t = 0; t < 256; ++t) {
    w0 += hist[t];
    sum0 += t * hist[t];
    const double w1 = total - w0;
    if (w0 == 0.0 || w1 == 0.0) {
      if (best < 0.0) {
        best = 0.0;
        best_t = t;
      }
      continue;
    }
    const double mu0 = sum0 / w0, mu1 = (sum_all - sum0) / w1;
    const double between = w0 * w1 * (mu0 - mu1) * (mu0 - mu1);
    if (between > best) {
      best = between;
      best_t = t;
    }
  }
  return best_t;
}

ArtifactRemoval remove_artifacts(const GrayImage& image) {
  const int w = image.width, h = image.height;
  const int t = otsu_threshold(image);
  std::vector<int> label(image.pixels.size(), -1);
  std::vector<std::size_t> sizes;
  std::vector<int> stack;
  for (std::size_t start = 0; start < image.pixels.size(); ++start) {
    if (image.pixels[start] <= t || label[start] >= 0) continue;
    const int id = static_cast<int>(sizes.size());
    std::size_t count = 0;
    label[start] = id;
    stack.push_back(static_cast<int>(start));
    while (!stack.empty()) {
      const int p = stack.back();
      stack.pop_back();
      ++count;
      const int x = p % w, y = p / w;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const int nx = x + dx, ny = y + dy;
          if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
          const int q = ny * w + nx;
          if (label[q] < 0 && image.pixels[q] > t) {
            label[q] = id;
            stack.push_back(q);
          }
        }
      }
    }
    sizes.push_back(count);
  }
  if (sizes.empty()) throw std::invalid_argument("no breast region: image has no foreground");
  // Ties keep the component found first in raster order.
  const int keep = static_cast<int>(std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
  ArtifactRemoval out{GrayImage(w, h), GrayImage(w, h)};
  for (std::size_t i = 0; i < image.pixels.size(); ++i) {
    if (label[i] == keep) {
      out.cleaned.pixels[i] = image.pixels[i];
      out.mask.pixels[i] = 1;
    }
  }
  return out;
}

namespace {

// Equalization lookup table of one tile after clipping.
std::array<float, 256> tile_lut(const GrayImage& img, int x0, int x1, int y0, int y1, double clip_limit) {
  std::array<double, 256> hist{};
  for (int y = y0; y < y1; ++y) {
    for (int x = x0; x < x1; ++x) hist[img.at(x, y)] += 1.0;
  }
  const double area = static_cast<double>(x1 - x0) * (y1 - y0);
  const double clip = clip_limit * area / 256.0;
  double excess = 0.0;
  for (auto& b : hist) {
    if (b > clip) {
      excess += b - clip;
      b = clip;
    }
  }
  const double spread = excess / 256.0;
  std::array<float, 256> lut{};
  double cdf = 0.0;
  for (int v = 0; v < 256; ++v) {
    cdf += hist[v] + spread;
    lut[v] = static_cast<float>(std::min(255.0, cdf * 255.0 / area));
  }
  return lut;
}

// Interpolation weights along one axis: the two neighboring tile indices
// and the weight of the second.
struct AxisBlend {
  int lo = 0;
  int hi = 0;
  float t = 0.0f;
};

std::vector<AxisBlend> axis_blend(int length, int tiles) {
  std::vector<double> centers(tiles);
  for (int i = 0; i < tiles; ++i) {
    centers[i] = 0.5 * (tile_begin(i, tiles, length) + tile_begin(i + 1, tiles, length)) - 0.5;
  }
  std::vector<AxisBlend> out(length);
  for (int p = 0; p < length; ++p) {
    if (p <= centers.front()) {
      out[p] = {0, 0, 0.0f};
    } else if (p >= centers.back()) {
      out[p] = {tiles - 1, tiles - 1, 0.0f};
    } else {
      int i = 0;
      while (centers[i + 1] < p) ++i;
      out[p] = {i, i + 1, static_cast<float>((p - centers[i]) / (centers[i + 1] - centers[i]))};
    }
  }
  return out;
}

}  // namespace

GrayImage clahe(const GrayImage& image, const ClaheConfig& config) {
  const int tx = config.tiles_x, ty = config.tiles_y;
  if (tx <= 0 || ty <= 0 || tx > image.width || ty > image.height) {
    throw std::invalid_argument("CLAHE tile grid " + std::to_string(tx) + "x" + std::to_string(ty) +
                                " does not fit a " + std::to_string(image.width) + "x" +
                                std::to_string(image.height) + " image");
  }
  if (!(config.clip_limit > 0.0)) throw std::invalid_argument("CLAHE clip limit must be positive");
  std::vector<std::array<float, 256>> luts(static_cast<std::size_t>(tx) * ty);
  for (int j = 0; j < ty; ++j) {
    for (int i = 0; i < tx; ++i) {
      luts[j * tx + i] = tile_lut(image, tile_begin(i, tx, image.width), tile_begin(i + 1, tx, image.width),
                                  tile_begin(j, ty, image.height), tile_begin(j + 1, ty, image.height),
                                  config.clip_limit);
    }
  }
  const auto bx = axis_blend(image.width, tx);
  const auto by = axis_blend(image.height, ty);
  GrayImage out(image.width, image.height);
  for (int y = 0; y < image.height; ++y) {
    const AxisBlend& v = by[y];
    for (int x = 0; x < image.width; ++x) {
      const AxisBlend& u = bx[x];
      const int p = image.at(x, y);
      const float top = (1 - u.t) * luts[v.lo * tx + u.lo][p] + u.t * luts[v.lo * tx + u.hi][p];
      const float bottom = (1 - u.t) * luts[v.hi * tx + u.lo][p] + u.t * luts[v.hi * tx + u.hi][p];
      const float value = (1 - v.t) * top + v.t * bottom;
      out.at(x, y) = static_cast<std::uint8_t>(std::clamp(std::lround(value), 0L, 255L));
    }
  }
  return out;
}

}  // namespace gradlens::prep
