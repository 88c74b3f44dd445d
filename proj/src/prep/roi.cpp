#include "gradlens/prep/roi.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gradlens::prep {
namespace {

struct Tap {
  int i0 = 0;
  int i1 = 0;
  float t = 0.0f;
};

std::vector<Tap> taps(int in, int out) {
  std::vector<Tap> r(out);
  const double scale = static_cast<double>(in) / out;
  for (int d = 0; d < out; ++d) {
    double s = std::clamp((d + 0.5) * scale - 0.5, 0.0, static_cast<double>(in - 1));
    const int i0 = static_cast<int>(s);
    const int i1 = std::min(i0 + 1, in - 1);
    r[d] = {i0, i1, static_cast<float>(s - i0)};
  }
  return r;
}

}  // namespace

GrayImage resize_bilinear(const GrayImage& image, int width, int height) {
  if (image.width <= 0 || image.height <= 0 || width <= 0 || height <= 0) {
    throw std::invalid_argument("resize: dimensions must be positive");
  }
  if (image.width == width && image.height == height) return image;
  const auto tx = taps(image.width, width);
  const auto ty = taps(image.height, height);
  GrayImage out(width, height);
  for (int y = 0; y < height; ++y) {
    const Tap& v = ty[y];
    for (int x = 0; x < width; ++x) {
      const Tap& u = tx[x];
      const float top = (1 - u.t) * image.at(u.i0, v.i0) + u.t * image.at(u.i1, v.i0);
      const float bottom = (1 - u.t) * image.at(u.i0, v.i1) + u.t * image.at(u.i1, v.i1);
      out.at(x, y) = static_cast<std::uint8_t>(std::clamp(std::lround((1 - v.t) * top + v.t * bottom), 0L, 255L));
    }
  }
  return out;
}

GrayImage crop_padded(const GrayImage& image, int x0, int y0, int side) {
  if (side <= 0) throw std::invalid_argument("crop side must be positive");
  GrayImage out(side, side);
  for (int y = 0; y < side; ++y) {
    const int sy = y0 + y;
    if (sy < 0 || sy >= image.height) continue;
    for (int x = 0; x < side; ++x) {
      const int sx = x0 + x;
      if (sx >= 0 && sx < image.width) out.at(x, y) = image.at(sx, sy);
    }
  }
  return out;
}

Crop extract_roi(const GrayImage& image, const Roi& roi) {
  if (roi.radius <= 0) throw std::invalid_argument("ROI radius must be positive");
  const int cx = roi.x;
  const int cy = image.height - roi.y;
  const int side = 2 * roi.radius;
  Crop c;
  c.image = resize_bilinear(crop_padded(image, cx - roi.radius, cy - roi.radius, side), kSampleSide, kSampleSide);
  c.lesion.assign(static_cast<std::size_t>(kSampleSide) * kSampleSide, 0);
  const double scale = static_cast<double>(side) / kSampleSide;
  const double r2 = static_cast<double>(roi.radius) * roi.radius;
  for (int y = 0; y < kSampleSide; ++y) {
    for (int x = 0; x < kSampleSide; ++x) {
      const double dx = (x + 0.5) * scale - roi.radius;
      const double dy = (y + 0.5) * scale - roi.radius;
      if (dx * dx + dy * dy <= r2) c.lesion[static_cast<std::size_t>(y) * kSampleSide + x] = 1;
    }
  }
  return c;
}

Point mask_centroid(const GrayImage& mask) {
  double sx = 0.0, sy = 0.0, n = 0.0;
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      if (mask.at(x, y)) {
        sx += x;
        sy += y;
        n += 1.0;
      }
    }
  }
  if (n == 0.0) throw std::invalid_argument("empty breast mask");
  return {static_cast<int>(std::lround(sx / n)), static_cast<int>(std::lround(sy / n))};
}

Crop central_crop_normal(const GrayImage& image, const GrayImage& mask) {
  const Point c = mask_centroid(mask);
  const int half = kNormalCropSide / 2;
  return {resize_bilinear(crop_padded(image, c.x - half, c.y - half, kNormalCropSide), kSampleSide, kSampleSide),
          {}};
}

Tensor to_tensor(const GrayImage& image) {
  Tensor t({image.height, image.width, 3});
  float* d = t.data();
  for (std::size_t i = 0; i < image.pixels.size(); ++i) {
    const float v = static_cast<float>(image.pixels[i]) / 255.0f;
    d[3 * i] = d[3 * i + 1] = d[3 * i + 2] = v;
  }
  return t;
}

}  // namespace gradlens::prep
