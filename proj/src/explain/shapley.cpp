#include "gradlens/explain/shapley.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>

#include "gradlens/rng.hpp"

namespace gradlens::explain {

namespace {

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  double c = 1.0;
  for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return n <= 60 ? std::round(c) : c;
}

// Kernel mass of all coalitions of one size: pi(s) * C(F, s).
double size_mass(int features, int size) {
  return static_cast<double>(features - 1) / (static_cast<double>(size) * (features - size));
}

void add_all_of_size(int features, int size, double weight, std::vector<CoalitionSample>& out) {
  std::vector<int> idx(size);
  for (int i = 0; i < size; ++i) idx[i] = i;
  while (true) {
    CoalitionSample s;
    s.on_off.assign(features, 0);
    for (int i : idx) s.on_off[i] = 1;
    s.weight = weight;
    out.push_back(std::move(s));
    int i = size - 1;
    while (i >= 0 && idx[i] == features - size + i) --i;
    if (i < 0) return;
    ++idx[i];
    for (int j = i + 1; j < size; ++j) idx[j] = idx[j - 1] + 1;
  }
}

}  // namespace

std::vector<double> exact_shapley(const ScalarCoalitionFn& f, int features) {
  if (features < 1) throw std::invalid_argument("exact Shapley needs at least one feature");
  if (features > kMaxExactFeatures) {
    throw std::invalid_argument("exact Shapley over " + std::to_string(features) +
                                " features needs 2^F model calls; use Kernel SHAP above " +
                                std::to_string(kMaxExactFeatures));
  }
  const std::size_t n = std::size_t{1} << features;
  std::vector<double> value(n);
  std::vector<std::uint8_t> on_off(features);
  for (std::size_t mask = 0; mask < n; ++mask) {
    for (int i = 0; i < features; ++i) on_off[i] = (mask >> i) & 1u;
    value[mask] = f(on_off);
  }
  // |S|! (F - |S| - 1)! / F! = 1 / (F * C(F - 1, |S|)).
  std::vector<double> weight(features);
  for (int s = 0; s < features; ++s) weight[s] = 1.0 / (features * binomial(features - 1, s));
  std::vector<double> phi(features, 0.0);
  for (int i = 0; i < features; ++i) {
    const std::size_t bit = std::size_t{1} << i;
    for (std::size_t mask = 0; mask < n; ++mask) {
      if (mask & bit) continue;
      phi[i] += weight[std::popcount(mask)] * (value[mask | bit] - value[mask]);
    }
  }
  return phi;
}

double shap_kernel_weight(int features, int size) {
  if (features < 2 || size <= 0 || size >= features) {
    throw std::invalid_argument("coalition size " + std::to_string(size) + " of " + std::to_string(features) +
                                " is a constraint coalition without a finite kernel weight");
  }
  return static_cast<double>(features - 1) /
         (binomial(features, size) * static_cast<double>(size) * static_cast<double>(features - size));
}

std::vector<CoalitionSample> shap_coalitions(int features, int budget, std::uint64_t seed) {
  if (features < 1) throw std::invalid_argument("Kernel SHAP needs at least one feature");
  const double all = std::ldexp(1.0, std::min(features, 1000));
  if (budget < 2 || (budget < features + 2 && budget < all)) {
    throw std::invalid_argument("Kernel SHAP budget " + std::to_string(budget) + " is below F + 2 = " +
                                std::to_string(features + 2));
  }
  std::vector<CoalitionSample> out;
  out.push_back({std::vector<std::uint8_t>(features, 1), 0.0});
  out.push_back({std::vector<std::uint8_t>(features, 0), 0.0});
  long long remaining = budget - 2;

  std::vector<bool> complete(features + 1, false);
  for (int s = 1; s <= features / 2; ++s) {
    const bool paired = s != features - s;
    const double count = binomial(features, s) * (paired ? 2.0 : 1.0);
    if (count > static_cast<double>(remaining)) break;
    const double w = shap_kernel_weight(features, s);
    add_all_of_size(features, s, w, out);
    if (paired) add_all_of_size(features, features - s, w, out);
    complete[s] = complete[features - s] = true;
    remaining -= static_cast<long long>(count);
  }

  std::vector<int> lower;  // sizes s <= F/2 still incomplete
  std::vector<double> cumulative;
  double leftover = 0.0, acc = 0.0;
  for (int s = 1; s <= features / 2; ++s) {
    if (complete[s]) continue;
    const double m = size_mass(features, s) + (s != features - s ? size_mass(features, features - s) : 0.0);
    leftover += m;
    acc += m;
    lower.push_back(s);
    cumulative.push_back(acc);
  }
  if (remaining <= 0 || lower.empty()) return out;

  Rng rng(derive_seed(seed, "kernel-shap-coalitions"));
  const std::size_t first_sampled = out.size();
  std::vector<int> perm(features);
  while (remaining > 0) {
    const double u = rng.uniform() * acc;
    std::size_t k = 0;
    while (k + 1 < cumulative.size() && u >= cumulative[k]) ++k;
    const int s = lower[k];
    for (int i = 0; i < features; ++i) perm[i] = i;
    for (int i = 0; i < s; ++i) std::swap(perm[i], perm[i + static_cast<int>(rng.below(features - i))]);
    CoalitionSample a;
    a.on_off.assign(features, 0);
    for (int i = 0; i < s; ++i) a.on_off[perm[i]] = 1;
    CoalitionSample b;
    b.on_off.resize(features);
    for (int i = 0; i < features; ++i) b.on_off[i] = 1 - a.on_off[i];
    out.push_back(std::move(a));
    --remaining;
    if (remaining > 0) {
      out.push_back(std::move(b));
      --remaining;
    }
  }
  const double w = leftover / static_cast<double>(out.size() - first_sampled);
  for (std::size_t i = first_sampled; i < out.size(); ++i) out[i].weight = w;
  return out;
}

ShapSolution solve_kernel_shap(const std::vector<CoalitionSample>& samples,
                               const std::vector<std::vector<double>>& values, double ridge_lambda) {
  if (samples.size() < 2 || values.size() != samples.size()) {
    throw std::invalid_argument("Kernel SHAP needs the all-on and all-off coalitions with one value each");
  }
  const int f = static_cast<int>(samples[0].on_off.size());
  const std::size_t outputs = values[0].size();
  ShapSolution sol;
  sol.full = values[0];
  sol.base = values[1];
  sol.phi.assign(outputs, std::vector<double>(f, 0.0));
  for (const auto& v : values) {
    if (v.size() != outputs) throw std::invalid_argument("model returned a varying number of outputs");
  }
  if (f == 1) {
    for (std::size_t c = 0; c < outputs; ++c) sol.phi[c][0] = sol.full[c] - sol.base[c];
    return sol;
  }
  const int m = f - 1;
  const std::size_t n = samples.size() - 2;
  Eigen::MatrixXd x(n, m);
  Eigen::VectorXd w(n);
  Eigen::MatrixXd y(n, outputs);
  for (std::size_t r = 0; r < n; ++r) {
    const auto& s = samples[r + 2];
    const double last = s.on_off[m];
    for (int i = 0; i < m; ++i) x(r, i) = s.on_off[i] - last;
    w(r) = s.weight;
    for (std::size_t c = 0; c < outputs; ++c) {
      y(r, c) = values[r + 2][c] - sol.base[c] - last * (sol.full[c] - sol.base[c]);
    }
  }
  const Eigen::MatrixXd xtw = x.transpose() * w.asDiagonal();
  Eigen::MatrixXd a = xtw * x;
  const Eigen::MatrixXd b = xtw * y;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
  if (n < static_cast<std::size_t>(m) || ldlt.info() != Eigen::Success || !(ldlt.rcond() > 1e-12)) {
    a.diagonal().array() += ridge_lambda;
    ldlt.compute(a);
    sol.ridge_fallback = true;
  }
  const Eigen::MatrixXd beta = ldlt.solve(b);
  for (std::size_t c = 0; c < outputs; ++c) {
    double sum = 0.0;
    for (int i = 0; i < m; ++i) {
      sol.phi[c][i] = beta(i, c);
      sum += beta(i, c);
    }
    sol.phi[c][m] = (sol.full[c] - sol.base[c]) - sum;
  }
  return sol;
}

ShapSolution kernel_shap_coalitions(const CoalitionFn& f, int features, int budget, std::uint64_t seed,
                                    double ridge_lambda, int jobs) {
  const auto samples = shap_coalitions(features, budget, seed);
  std::vector<std::vector<std::uint8_t>> masks;
  masks.reserve(samples.size());
  for (const auto& s : samples) masks.push_back(s.on_off);
  return solve_kernel_shap(samples, evaluate_coalitions(f, masks, jobs), ridge_lambda);
}

std::vector<Attribution> kernel_shap(const BlackBox& model, const Tensor& image, const seg::SegmentationMap& seg,
                                     const ExplainerConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  const std::uint64_t seed = derive_seed(config.seed, "kernel-shap");
  const auto sol = kernel_shap_coalitions(image_coalitions(model, image, seg, config.baseline), seg.n_segments,
                                          config.shap_samples, seed, config.ridge_lambda, config.jobs);
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::vector<Attribution> out;
  for (std::size_t c = 0; c < sol.phi.size(); ++c) {
    Attribution a;
    a.method = Method::kKernelShap;
    a.target_class = static_cast<int>(c);
    a.per_segment = sol.phi[c];
    a.base_value = sol.base[c];
    a.runtime_seconds = elapsed;
    a.seed = config.seed;
    a.ridge_fallback = sol.ridge_fallback;
    out.push_back(std::move(a));
  }
  return out;
}

}  // namespace gradlens::explain
