#include "gradlens/explain/lime.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "gradlens/rng.hpp"

namespace gradlens::explain {

double lime_proximity(int on_count, int features, double kernel_width) {
  if (features < 1 || on_count < 0 || on_count > features) throw std::invalid_argument("invalid LIME coalition");
  if (!(kernel_width > 0.0)) throw std::invalid_argument("LIME kernel width must be positive");
  const double cosine = std::sqrt(static_cast<double>(on_count) / features);
  const double d = 1.0 - cosine;
  return std::exp(-(d * d) / (kernel_width * kernel_width));
}

std::vector<std::vector<std::uint8_t>> lime_perturbations(int features, int samples, std::uint64_t seed) {
  if (features < 1) throw std::invalid_argument("LIME needs at least one feature");
  if (samples < 1) throw std::invalid_argument("LIME needs at least one perturbation sample");
  Rng rng(derive_seed(seed, "lime-perturbations"));
  std::vector<std::vector<std::uint8_t>> out(samples, std::vector<std::uint8_t>(features));
  for (auto& z : out) {
    for (auto& v : z) v = rng.bernoulli(0.5) ? 1 : 0;
  }
  return out;
}

LimeFit lime_fit(const CoalitionFn& f, int features, int target, const LimeOptions& options) {
  if (options.top_k < 1) throw std::invalid_argument("LIME top-k must be at least 1");
  const auto z = lime_perturbations(features, options.samples, options.seed);
  if (std::all_of(z.begin(), z.end(), [&](const auto& row) { return row == z[0]; })) {
    throw std::invalid_argument("all " + std::to_string(z.size()) +
                                " LIME perturbations are identical; rerun with another seed or more samples");
  }
  const double width = options.kernel_width > 0.0 ? options.kernel_width : 0.25 * std::sqrt(features);
  const auto values = evaluate_coalitions(f, z, options.jobs);

  const std::size_t n = z.size();
  Eigen::MatrixXd x(n, features);
  Eigen::VectorXd y(n), w(n);
  for (std::size_t r = 0; r < n; ++r) {
    if (target < 0 || static_cast<std::size_t>(target) >= values[r].size()) {
      throw std::invalid_argument("LIME target " + std::to_string(target) + " is not a model output");
    }
    int on = 0;
    for (int i = 0; i < features; ++i) {
      x(r, i) = z[r][i];
      on += z[r][i];
    }
    y(r) = values[r][target];
    w(r) = lime_proximity(on, features, width);
  }
  // Weighted ridge with an unpenalized intercept: center by weighted means.
  const double wsum = w.sum();
  const Eigen::RowVectorXd xmean = (w.transpose() * x) / wsum;
  const double ymean = w.dot(y) / wsum;
  const Eigen::MatrixXd xc = x.rowwise() - xmean;
  const Eigen::VectorXd yc = y.array() - ymean;
  const Eigen::MatrixXd xtw = xc.transpose() * w.asDiagonal();
  Eigen::MatrixXd a = xtw * xc;
  a.diagonal().array() += options.ridge_lambda;
  const Eigen::VectorXd beta = a.ldlt().solve(xtw * yc);

  LimeFit fit;
  fit.coefficients.assign(beta.data(), beta.data() + features);
  fit.intercept = ymean - xmean.dot(beta);
  std::vector<int> order(features);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int p, int q) { return std::abs(fit.coefficients[p]) > std::abs(fit.coefficients[q]); });
  order.resize(std::min(options.top_k, features));
  fit.selected = order;
  fit.per_segment.assign(features, 0.0);
  for (int i : order) fit.per_segment[i] = fit.coefficients[i];
  return fit;
}

Attribution lime_explain(const BlackBox& model, const Tensor& image, const seg::SegmentationMap& seg,
                         int target_class, const ExplainerConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  LimeOptions opt;
  opt.samples = config.lime_samples;
  opt.kernel_width = config.lime_kernel_width;
  opt.top_k = config.lime_top_k;
  opt.ridge_lambda = config.ridge_lambda;
  opt.seed = derive_seed(config.seed, "lime");
  opt.jobs = config.jobs;
  const auto fit = lime_fit(image_coalitions(model, image, seg, config.baseline), seg.n_segments, target_class, opt);
  Attribution a;
  a.method = Method::kLime;
  a.target_class = target_class;
  a.per_segment = fit.per_segment;
  a.base_value = fit.intercept;
  a.seed = config.seed;
  a.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return a;
}

}  // namespace gradlens::explain
