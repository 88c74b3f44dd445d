#include "gradlens/seg/slic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include "gradlens/parallel.hpp"

namespace gradlens::seg {

namespace {

std::vector<float> intensity(const Tensor& image) {
  if (image.rank() != 3 || image.dim(2) < 1) throw std::invalid_argument("slic: expected an (h, w, c) image");
  const int h = image.dim(0), w = image.dim(1), c = image.dim(2);
  std::vector<float> out(static_cast<std::size_t>(h) * w);
  for (std::size_t p = 0; p < out.size(); ++p) {
    float s = 0.0f;
    for (int k = 0; k < c; ++k) s += image[p * c + k];
    out[p] = s / static_cast<float>(c);
  }
  return out;
}

struct Center {
  double x, y, i;
};

void check_map(const Tensor& image, const SegmentationMap& seg) {
  if (image.rank() != 3 || image.dim(0) != seg.height || image.dim(1) != seg.width) {
    throw std::invalid_argument("image " + image.shape_string() + " does not match a " + std::to_string(seg.width) +
                                "x" + std::to_string(seg.height) + " segmentation");
  }
}

// 4-connected components; returns the component id per pixel.
std::vector<int> components(int w, int h, const std::vector<int>& labels, int& count) {
  std::vector<int> comp(labels.size(), -1);
  std::vector<int> stack;
  count = 0;
  for (int start = 0; start < static_cast<int>(labels.size()); ++start) {
    if (comp[start] >= 0) continue;
    comp[start] = count;
    stack.assign(1, start);
    while (!stack.empty()) {
      const int p = stack.back();
      stack.pop_back();
      const int x = p % w, y = p / w;
      const int nb[4] = {x > 0 ? p - 1 : -1, x + 1 < w ? p + 1 : -1, y > 0 ? p - w : -1, y + 1 < h ? p + w : -1};
      for (int q : nb) {
        if (q >= 0 && comp[q] < 0 && labels[q] == labels[p]) {
          comp[q] = count;
          stack.push_back(q);
        }
      }
    }
    ++count;
  }
  return comp;
}

// Merges components smaller than min_size into their largest neighbor.
std::vector<int> enforce_connectivity(int w, int h, const std::vector<int>& labels, std::size_t min_size) {
  int n = 0;
  const std::vector<int> comp = components(w, h, labels, n);
  std::vector<std::size_t> size(n, 0);
  for (int c : comp) ++size[c];
  std::vector<std::set<int>> nbrs(n);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int p = y * w + x;
      if (x + 1 < w && comp[p] != comp[p + 1]) {
        nbrs[comp[p]].insert(comp[p + 1]);
        nbrs[comp[p + 1]].insert(comp[p]);
      }
      if (y + 1 < h && comp[p] != comp[p + w]) {
        nbrs[comp[p]].insert(comp[p + w]);
        nbrs[comp[p + w]].insert(comp[p]);
      }
    }
  }
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  const auto find = [&](int a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  for (int c = 0; c < n; ++c) {
    const int root = find(c);
    if (size[root] >= min_size) continue;
    int best = -1;
    for (int q : nbrs[root]) {
      const int r = find(q);
      if (r == root) continue;
      if (best < 0 || size[r] > size[best] || (size[r] == size[best] && r < best)) best = r;
    }
    if (best < 0) continue;
    parent[root] = best;
    size[best] += size[root];
    for (int q : nbrs[root]) nbrs[best].insert(q);
    nbrs[root].clear();
  }
  std::vector<int> out(labels.size());
  for (std::size_t p = 0; p < out.size(); ++p) out[p] = find(comp[p]);
  return out;
}

}  // namespace

std::vector<std::size_t> SegmentationMap::sizes() const {
  std::vector<std::size_t> out(n_segments, 0);
  for (int l : labels) ++out[l];
  return out;
}

double grid_spacing(int width, int height, int target_segments) {
  return std::sqrt(static_cast<double>(width) * height / target_segments);
}

std::vector<Seed> slic_seeds(const Tensor& image, int target_segments) {
  const auto inten = intensity(image);
  const int h = image.dim(0), w = image.dim(1);
  if (target_segments < 1) throw std::invalid_argument("slic: target segments must be at least 1");
  if (static_cast<std::size_t>(target_segments) > inten.size()) {
    throw std::invalid_argument("slic: " + std::to_string(target_segments) + " segments requested for " +
                                std::to_string(inten.size()) + " pixels");
  }
  const double s = grid_spacing(w, h, target_segments);
  const int nx = std::clamp(static_cast<int>(std::lround(w / s)), 1, w);
  const int ny = std::clamp(static_cast<int>(std::lround(h / s)), 1, h);
  const auto at = [&](int x, int y) { return inten[static_cast<std::size_t>(std::clamp(y, 0, h - 1)) * w + std::clamp(x, 0, w - 1)]; };
  const auto gradient = [&](int x, int y) {
    const double gx = at(x + 1, y) - at(x - 1, y), gy = at(x, y + 1) - at(x, y - 1);
    return gx * gx + gy * gy;
  };
  std::vector<Seed> seeds;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int cx = std::min(w - 1, static_cast<int>((i + 0.5) * w / nx));
      const int cy = std::min(h - 1, static_cast<int>((j + 0.5) * h / ny));
      int bx = cx, by = cy;
      double best = gradient(cx, cy);
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const int x = cx + dx, y = cy + dy;
          if (x < 0 || y < 0 || x >= w || y >= h) continue;
          const double g = gradient(x, y);
          if (g < best) {
            best = g;
            bx = x;
            by = y;
          }
        }
      }
      seeds.push_back({static_cast<double>(bx), static_cast<double>(by)});
    }
  }
  return seeds;
}

SegmentationMap slic_segment(const Tensor& image, const SlicConfig& config) {
  if (!(config.compactness > 0.0)) throw std::invalid_argument("slic: compactness must be positive");
  if (config.max_iterations < 1) throw std::invalid_argument("slic: max iterations must be at least 1");
  const auto seeds = slic_seeds(image, config.target_segments);
  const auto inten = intensity(image);
  const int h = image.dim(0), w = image.dim(1);
  const double s = grid_spacing(w, h, config.target_segments);
  const double spatial = config.compactness / s;  // weight on pixel distance
  const double spatial2 = spatial * spatial;

  std::vector<Center> centers;
  for (const auto& seed : seeds) {
    centers.push_back({seed.x, seed.y, inten[static_cast<std::size_t>(seed.y) * w + static_cast<int>(seed.x)]});
  }
  const int k = static_cast<int>(centers.size());

  // Initial labels: nearest seed in the spatial term alone.
  std::vector<int> labels(inten.size(), 0);
  std::vector<double> dist(inten.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double best = std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c) {
        const double d = (x - centers[c].x) * (x - centers[c].x) + (y - centers[c].y) * (y - centers[c].y);
        if (d < best) {
          best = d;
          labels[static_cast<std::size_t>(y) * w + x] = c;
        }
      }
    }
  }

  std::vector<std::vector<int>> row_centers(h);
  for (int iter = 0; iter < config.max_iterations; ++iter) {
    for (auto& r : row_centers) r.clear();
    for (int c = 0; c < k; ++c) {
      const int y0 = std::max(0, static_cast<int>(std::ceil(centers[c].y - s)));
      const int y1 = std::min(h - 1, static_cast<int>(std::floor(centers[c].y + s)));
      for (int y = y0; y <= y1; ++y) row_centers[y].push_back(c);
    }
    parallel_for(static_cast<std::size_t>(h), config.jobs, [&](std::size_t yy) {
      const int y = static_cast<int>(yy);
      double* drow = dist.data() + static_cast<std::size_t>(y) * w;
      int* lrow = labels.data() + static_cast<std::size_t>(y) * w;
      const float* irow = inten.data() + static_cast<std::size_t>(y) * w;
      std::fill(drow, drow + w, std::numeric_limits<double>::infinity());
      for (int c : row_centers[y]) {
        const Center& ct = centers[c];
        const int x0 = std::max(0, static_cast<int>(std::ceil(ct.x - s)));
        const int x1 = std::min(w - 1, static_cast<int>(std::floor(ct.x + s)));
        const double dy2 = (y - ct.y) * (y - ct.y);
        for (int x = x0; x <= x1; ++x) {
          const double di = irow[x] - ct.i;
          const double d = di * di + ((x - ct.x) * (x - ct.x) + dy2) * spatial2;
          if (d < drow[x]) {
            drow[x] = d;
            lrow[x] = c;
          }
        }
      }
    });

    std::vector<double> sx(k, 0.0), sy(k, 0.0), si(k, 0.0);
    std::vector<std::size_t> n(k, 0);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const std::size_t p = static_cast<std::size_t>(y) * w + x;
        const int c = labels[p];
        sx[c] += x;
        sy[c] += y;
        si[c] += inten[p];
        ++n[c];
      }
    }
    double shift = 0.0;
    for (int c = 0; c < k; ++c) {
      if (n[c] == 0) continue;
      const Center next{sx[c] / n[c], sy[c] / n[c], si[c] / n[c]};
      const double dx = next.x - centers[c].x, dy = next.y - centers[c].y, di = next.i - centers[c].i;
      shift += std::sqrt(di * di + (dx * dx + dy * dy) * spatial2);
      centers[c] = next;
    }
    if (shift / k < config.epsilon) break;
  }

  const auto min_size = static_cast<std::size_t>(s * s / 4.0);
  return relabel_contiguous(w, h, enforce_connectivity(w, h, labels, min_size));
}

SegmentationMap relabel_contiguous(int width, int height, const std::vector<int>& labels) {
  if (labels.size() != static_cast<std::size_t>(width) * height) {
    throw std::invalid_argument("label count does not match the image size");
  }
  SegmentationMap out;
  out.width = width;
  out.height = height;
  out.labels.resize(labels.size());
  std::vector<int> lookup;
  for (std::size_t p = 0; p < labels.size(); ++p) {
    const int old = labels[p];
    if (old < 0) throw std::invalid_argument("negative segment label");
    if (static_cast<std::size_t>(old) >= lookup.size()) lookup.resize(old + 1, -1);
    if (lookup[old] < 0) lookup[old] = out.n_segments++;
    out.labels[p] = lookup[old];
  }
  return out;
}

Tensor baseline_image(const Tensor& image, const SegmentationMap& seg, BaselineMode mode) {
  check_map(image, seg);
  Tensor out(image.shape());
  const int c = image.dim(2);
  const std::size_t pixels = seg.labels.size();
  switch (mode) {
    case BaselineMode::kZero:
      break;
    case BaselineMode::kImageMean: {
      double sum = 0.0;
      for (float v : image.values()) sum += v;
      out.fill(static_cast<float>(sum / static_cast<double>(image.size())));
      break;
    }
    case BaselineMode::kSegmentMean: {
      std::vector<double> sum(seg.n_segments, 0.0);
      const auto sizes = seg.sizes();
      for (std::size_t p = 0; p < pixels; ++p) {
        for (int k = 0; k < c; ++k) sum[seg.labels[p]] += image[p * c + k];
      }
      for (std::size_t p = 0; p < pixels; ++p) {
        const int l = seg.labels[p];
        const float v = static_cast<float>(sum[l] / static_cast<double>(sizes[l] * c));
        for (int k = 0; k < c; ++k) out[p * c + k] = v;
      }
      break;
    }
  }
  return out;
}

Tensor mask_image(const Tensor& image, const SegmentationMap& seg, std::span<const std::uint8_t> on_off,
                  const Tensor& baseline) {
  check_map(image, seg);
  if (on_off.size() != static_cast<std::size_t>(seg.n_segments)) {
    throw std::invalid_argument("mask has " + std::to_string(on_off.size()) + " entries for " +
                                std::to_string(seg.n_segments) + " segments");
  }
  if (!baseline.same_shape(image)) throw std::invalid_argument("baseline shape does not match the image");
  Tensor out = image;
  const int c = image.dim(2);
  for (std::size_t p = 0; p < seg.labels.size(); ++p) {
    if (on_off[seg.labels[p]]) continue;
    for (int k = 0; k < c; ++k) out[p * c + k] = baseline[p * c + k];
  }
  return out;
}

Tensor mask_image(const Tensor& image, const SegmentationMap& seg, std::span<const std::uint8_t> on_off,
                  BaselineMode mode) {
  return mask_image(image, seg, on_off, baseline_image(image, seg, mode));
}

std::vector<std::vector<int>> segment_adjacency(const SegmentationMap& seg) {
  std::vector<std::set<int>> sets(seg.n_segments);
  const int w = seg.width, h = seg.height;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int a = seg.at(x, y);
      if (x + 1 < w && seg.at(x + 1, y) != a) {
        sets[a].insert(seg.at(x + 1, y));
        sets[seg.at(x + 1, y)].insert(a);
      }
      if (y + 1 < h && seg.at(x, y + 1) != a) {
        sets[a].insert(seg.at(x, y + 1));
        sets[seg.at(x, y + 1)].insert(a);
      }
    }
  }
  std::vector<std::vector<int>> out(seg.n_segments);
  for (int i = 0; i < seg.n_segments; ++i) out[i].assign(sets[i].begin(), sets[i].end());
  return out;
}

prep::GrayImage to_gray(const SegmentationMap& seg) {
  if (seg.n_segments > 256) {
    throw std::invalid_argument(std::to_string(seg.n_segments) + " segments do not fit one byte per pixel");
  }
  prep::GrayImage out(seg.width, seg.height);
  for (std::size_t p = 0; p < seg.labels.size(); ++p) out.pixels[p] = static_cast<std::uint8_t>(seg.labels[p]);
  return out;
}

std::string encode_segmentation(const SegmentationMap& seg) {
  const auto gray = to_gray(seg);
  std::string out = "P5\n" + std::to_string(seg.width) + " " + std::to_string(seg.height) + "\n" +
                    std::to_string(std::max(1, seg.n_segments - 1)) + "\n";
  out.append(gray.pixels.begin(), gray.pixels.end());
  return out;
}

SegmentationMap decode_segmentation(const std::string& bytes) {
  std::istringstream in(bytes);
  std::string magic;
  int w = 0, h = 0, maxval = 0;
  if (!(in >> magic >> w >> h >> maxval) || magic != "P5" || w <= 0 || h <= 0 || maxval < 1 || maxval > 255) {
    throw std::invalid_argument("segmentation file has a malformed P5 header");
  }
  in.get();
  const auto offset = static_cast<std::size_t>(in.tellg());
  const std::size_t n = static_cast<std::size_t>(w) * h;
  if (bytes.size() < offset + n) throw std::invalid_argument("segmentation payload is truncated");
  std::vector<int> labels(n);
  for (std::size_t p = 0; p < n; ++p) {
    labels[p] = static_cast<unsigned char>(bytes[offset + p]);
    if (labels[p] > maxval) throw std::invalid_argument("segment id exceeds maxval");
  }
  return relabel_contiguous(w, h, labels);
}

void save_segmentation(const SegmentationMap& seg, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  out << encode_segmentation(seg);
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

SegmentationMap load_segmentation(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return decode_segmentation(std::string(std::istreambuf_iterator<char>(in), {}));
}

}  // namespace gradlens::seg
