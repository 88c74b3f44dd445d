#include "gradlens/eval/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "gradlens/explain/gradcam.hpp"
#include "gradlens/explain/lime.hpp"
#include "gradlens/explain/shapley.hpp"
#include "gradlens/rng.hpp"
#include "gradlens/text.hpp"

namespace gradlens::eval {

double time_explainer(const std::function<void(const Tensor&)>& explain, const std::vector<Tensor>& images) {
  if (images.empty()) throw std::invalid_argument("timing needs at least one image");
  explain(images.front());
  double total = 0.0;
  for (const auto& img : images) {
    const auto start = std::chrono::steady_clock::now();
    explain(img);
    total += std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  return total / static_cast<double>(images.size());
}

double pearson(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size() || a.empty()) throw std::invalid_argument("correlation needs equal non-empty maps");
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma, db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa == 0.0 || sbb == 0.0) return std::equal(a.begin(), a.end(), b.begin()) ? 1.0 : 0.0;
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

std::vector<int> top_k_segments(const std::vector<double>& scores, int k) {
  std::vector<int> idx(scores.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return std::abs(scores[a]) > std::abs(scores[b]); });
  idx.resize(std::min<std::size_t>(idx.size(), static_cast<std::size_t>(std::max(k, 0))));
  std::sort(idx.begin(), idx.end());
  return idx;
}

double jaccard(const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<int> sa = a, sb = b, inter, uni;
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(inter));
  std::set_union(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(uni));
  return uni.empty() ? 1.0 : static_cast<double>(inter.size()) / static_cast<double>(uni.size());
}

std::vector<double> segment_means(const explain::Heatmap& map, const seg::SegmentationMap& seg) {
  if (map.width != seg.width || map.height != seg.height) throw std::invalid_argument("heatmap and segmentation differ");
  std::vector<double> sum(seg.n_segments, 0.0);
  const auto sizes = seg.sizes();
  for (std::size_t p = 0; p < seg.labels.size(); ++p) sum[seg.labels[p]] += map.values[p];
  for (int i = 0; i < seg.n_segments; ++i) sum[i] /= static_cast<double>(sizes[i]);
  return sum;
}

RobustnessScores robustness(const std::vector<explain::Heatmap>& heatmaps,
                            const std::vector<std::vector<double>>& segment_scores, int k) {
  if (heatmaps.size() < 2 || heatmaps.size() != segment_scores.size()) {
    throw std::invalid_argument("robustness needs at least two runs with heatmaps and segment scores");
  }
  RobustnessScores r;
  int pairs = 0;
  for (std::size_t i = 0; i < heatmaps.size(); ++i) {
    for (std::size_t j = i + 1; j < heatmaps.size(); ++j) {
      r.correlation += pearson(heatmaps[i].values, heatmaps[j].values);
      r.top_k_jaccard += jaccard(top_k_segments(segment_scores[i], k), top_k_segments(segment_scores[j], k));
      ++pairs;
    }
  }
  r.correlation /= pairs;
  r.top_k_jaccard /= pairs;
  return r;
}

double quantile(std::vector<float> values, double q) {
  if (values.empty()) throw std::invalid_argument("quantile of an empty set");
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("quantile must lie in [0, 1]");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (static_cast<double>(values[hi]) - values[lo]);
}

std::vector<std::uint8_t> binarize_heatmap(const explain::Heatmap& map, double q) {
  const double t = quantile(map.values, q);
  const float lowest = *std::min_element(map.values.begin(), map.values.end());
  std::vector<std::uint8_t> out(map.values.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = map.values[i] >= t && map.values[i] > lowest;
  return out;
}

std::optional<double> set_iou(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
  if (a.size() != b.size()) throw std::invalid_argument("IoU needs equally sized masks");
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    inter += a[i] && b[i];
    uni += a[i] || b[i];
  }
  if (uni == 0) return std::nullopt;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

std::optional<double> heatmap_iou(const explain::Heatmap& map, std::span<const std::uint8_t> lesion, double q) {
  if (lesion.size() != map.values.size()) throw std::invalid_argument("heatmap and lesion mask differ in size");
  if (std::none_of(lesion.begin(), lesion.end(), [](std::uint8_t v) { return v != 0; })) return std::nullopt;
  const auto bin = binarize_heatmap(map, q);
  return set_iou(bin, lesion);
}

prep::RgbImage render_overlay(const Tensor& image, const explain::Heatmap& map, Palette palette) {
  if (image.rank() != 3 || image.dim(0) != map.height || image.dim(1) != map.width) {
    throw std::invalid_argument("overlay image " + image.shape_string() + " does not match the heatmap");
  }
  const int c = image.dim(2);
  prep::RgbImage out(map.width, map.height);
  float peak = 0.0f;
  for (float v : map.values) peak = std::max(peak, std::abs(v));
  for (std::size_t p = 0; p < map.values.size(); ++p) {
    const float v = map.values[p];
    double color[3] = {0.0, 0.0, 0.0};
    double alpha = kOverlayAlpha;
    if (palette == Palette::kBlueRed) {
      const double t = std::clamp(static_cast<double>(v), 0.0, 1.0);
      color[0] = 255.0 * t;
      color[2] = 255.0 * (1.0 - t);
    } else {
      alpha = peak > 0.0f ? kOverlayAlpha * std::abs(v) / peak : 0.0;
      color[v >= 0.0f ? 1 : 0] = 255.0;
    }
    for (int k = 0; k < 3; ++k) {
      const double base = 255.0 * std::clamp(image[p * c + (c == 3 ? k : 0)], 0.0f, 1.0f);
      out.rgb[p * 3 + k] = static_cast<std::uint8_t>(std::lround(std::clamp((1.0 - alpha) * base + alpha * color[k], 0.0, 255.0)));
    }
  }
  return out;
}

namespace {

struct Explained {
  explain::Attribution attr;
  seg::SegmentationMap seg;
};

Explained explain_one(explain::Method method, const nn::NetworkState& state, const explain::BlackBox& model,
                      const Tensor& image, int target, const BenchConfig& config, std::uint64_t seed) {
  Explained e;
  explain::ExplainerConfig ec = config.explainer;
  ec.seed = seed;
  switch (method) {
    case explain::Method::kGradCam:
      e.attr = explain::grad_cam(state, image, target);
      return e;
    case explain::Method::kKernelShap:
      e.seg = seg::slic_segment(image, config.slic);
      e.attr = explain::kernel_shap(model, image, e.seg, ec)[target];
      break;
    case explain::Method::kLime:
      e.seg = seg::slic_segment(image, config.slic);
      e.attr = explain::lime_explain(model, image, e.seg, target, ec);
      break;
    case explain::Method::kExactShapley:
      throw std::invalid_argument("exact_shapley is a test oracle and is not benchmarked");
  }
  e.attr.heatmap = explain::attribution_to_heatmap(e.attr.per_segment, e.seg);
  return e;
}

}  // namespace

BenchReport run_bench(const nn::NetworkState& state, const std::vector<BenchImage>& images, const BenchConfig& config) {
  if (images.empty()) throw std::invalid_argument("bench needs at least one image");
  const auto model = explain::probability_model(state);
  std::vector<int> targets;
  std::vector<Tensor> tensors;
  for (const auto& img : images) {
    targets.push_back(nn::predict(state, img.image).label);
    tensors.push_back(img.image);
  }
  BenchReport report;
  report.images = static_cast<int>(images.size());
  for (const auto method : config.methods) {
    MethodBench mb;
    mb.method = method;
    std::vector<Explained> results;
    if (config.timing || config.iou) {
      // Calls run the warm-up first, then every image in order.
      std::size_t call = 0;
      const auto run = [&](const Tensor& img) {
        const std::size_t i = call == 0 ? 0 : call - 1;
        ++call;
        auto e = explain_one(method, state, model, img, targets[i], config, config.explainer.seed);
        if (call > 1) results.push_back(std::move(e));
      };
      mb.seconds_per_image = time_explainer(run, tensors);
    }
    if (config.iou) {
      double sum = 0.0;
      for (std::size_t i = 0; i < images.size(); ++i) {
        if (images[i].lesion_mask.empty()) continue;
        if (const auto iou = heatmap_iou(results[i].attr.heatmap, images[i].lesion_mask, config.iou_quantile)) {
          sum += *iou;
          ++mb.iou_images;
        }
      }
      if (mb.iou_images > 0) mb.mean_iou = sum / mb.iou_images;
    }
    if (config.robustness && config.robustness_runs >= 2) {
      std::vector<explain::Heatmap> maps;
      std::vector<std::vector<double>> scores;
      const auto shared_seg = seg::slic_segment(images[0].image, config.slic);
      for (int r = 0; r < config.robustness_runs; ++r) {
        const auto e = explain_one(method, state, model, images[0].image, targets[0], config,
                                   derive_seed(config.explainer.seed, static_cast<std::uint64_t>(r)));
        maps.push_back(e.attr.heatmap);
        scores.push_back(e.attr.per_segment.empty() ? segment_means(e.attr.heatmap, shared_seg) : e.attr.per_segment);
      }
      mb.robustness = robustness(maps, scores, config.top_k);
      report.robustness_runs = config.robustness_runs;
      report.robustness_image = images[0].id;
    }
    report.methods.push_back(std::move(mb));
  }
  if (config.timing) {
    const auto find = [&](explain::Method m) -> const MethodBench* {
      for (const auto& mb : report.methods)
        if (mb.method == m) return &mb;
      return nullptr;
    };
    const auto* g = find(explain::Method::kGradCam);
    const auto* s = find(explain::Method::kKernelShap);
    const auto* l = find(explain::Method::kLime);
    if (g && s && l) report.ordering_holds = g->seconds_per_image < s->seconds_per_image && s->seconds_per_image < l->seconds_per_image;
  }
  return report;
}

std::string format_bench_report(const BenchReport& report) {
  std::string out;
  const auto line = [&](const std::string& key, const std::string& value) { out += key + ": " + value + "\n"; };
  line("images", std::to_string(report.images));
  out += "[timing]\n";
  for (const auto& m : report.methods) {
    line(std::string(explain::method_name(m.method)) + ".seconds_per_image", format_double(m.seconds_per_image));
  }
  line("ordering_gradcam_lt_shap_lt_lime",
       report.ordering_holds ? (*report.ordering_holds ? "true" : "false") : std::string("n/a"));
  line("nondeterministic", "seconds_per_image ordering_gradcam_lt_shap_lt_lime");
  out += "[robustness]\n";
  line("image", report.robustness_image.empty() ? "n/a" : report.robustness_image);
  line("runs", std::to_string(report.robustness_runs));
  for (const auto& m : report.methods) {
    const std::string p = explain::method_name(m.method);
    line(p + ".correlation", m.robustness ? format_double(m.robustness->correlation) : "n/a");
    line(p + ".top10_jaccard", m.robustness ? format_double(m.robustness->top_k_jaccard) : "n/a");
  }
  out += "[iou]\n";
  for (const auto& m : report.methods) {
    const std::string p = explain::method_name(m.method);
    line(p + ".mean_iou", m.mean_iou ? format_double(*m.mean_iou) : "n/a");
    line(p + ".annotated_images", std::to_string(m.iou_images));
  }
  return out;
}

}  // namespace gradlens::eval
