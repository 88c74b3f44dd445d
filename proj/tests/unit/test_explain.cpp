#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <numeric>
#include <set>

#include "coalition_models.hpp"
#include "gradcheck.hpp"
#include "gradlens/explain/gradcam.hpp"
#include "gradlens/explain/lime.hpp"
#include "gradlens/explain/shapley.hpp"
#include "gradlens/rng.hpp"
#include "reference_net.hpp"

namespace gl = gradlens;
namespace ex = gradlens::explain;
using gl::testing::additive;
using gl::testing::random_image;
using gl::testing::random_mlp;
using gl::testing::toy_spec;

namespace {

ex::ScalarCoalitionFn scalar(const ex::CoalitionFn& f, int c = 0) {
  return [f, c](std::span<const std::uint8_t> z) { return f(z)[c]; };
}

TEST(ExactShapley, HandCase) {
  const ex::ScalarCoalitionFn f = [](std::span<const std::uint8_t> z) {
    static const double v[4] = {0, 1, 2, 4};
    return v[z[0] + 2 * z[1]];
  };
  const auto phi = ex::exact_shapley(f, 2);
  EXPECT_EQ(phi[0], 1.5);
  EXPECT_EQ(phi[1], 2.5);
}

TEST(ExactShapley, ConstantAndAdditive) {
  for (double v : ex::exact_shapley([](auto) { return 3.0; }, 6)) EXPECT_EQ(v, 0.0);
  const std::vector<double> w = {0.5, -2.0, 3.25, 0.0, 1.0};
  const auto phi = ex::exact_shapley(scalar(additive(w, 7.0)), 5);
  for (int i = 0; i < 5; ++i) EXPECT_NEAR(phi[i], w[i], 1e-12);
}

TEST(ExactShapley, RejectsTooManyFeatures) {
  try {
    ex::exact_shapley([](auto) { return 0.0; }, 21);
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("Kernel SHAP"), std::string::npos);
  }
}

TEST(KernelWeight, Examples) {
  EXPECT_DOUBLE_EQ(ex::shap_kernel_weight(4, 1), 0.25);
  EXPECT_DOUBLE_EQ(ex::shap_kernel_weight(4, 2), 0.125);
  for (int f = 2; f < 30; ++f)
    for (int s = 1; s < f; ++s) EXPECT_DOUBLE_EQ(ex::shap_kernel_weight(f, s), ex::shap_kernel_weight(f, f - s));
  EXPECT_THROW(ex::shap_kernel_weight(4, 0), std::invalid_argument);
  EXPECT_THROW(ex::shap_kernel_weight(4, 4), std::invalid_argument);
}

TEST(ShapCoalitions, ConstraintsFirstAndSizesOutward) {
  const auto s = ex::shap_coalitions(10, 112, 1);
  ASSERT_EQ(s.size(), 112u);
  EXPECT_EQ(s[0].on_off, std::vector<std::uint8_t>(10, 1));
  EXPECT_EQ(s[1].on_off, std::vector<std::uint8_t>(10, 0));
  // 2 + (10 + 10) + (45 + 45): sizes 1, 9, 2, 8 exactly once each.
  std::set<std::vector<std::uint8_t>> seen;
  std::array<int, 11> by_size{};
  for (std::size_t i = 2; i < s.size(); ++i) {
    seen.insert(s[i].on_off);
    ++by_size[std::accumulate(s[i].on_off.begin(), s[i].on_off.end(), 0)];
    EXPECT_GT(s[i].weight, 0.0);
  }
  EXPECT_EQ(seen.size(), 110u);
  EXPECT_EQ(by_size[1], 10);
  EXPECT_EQ(by_size[9], 10);
  EXPECT_EQ(by_size[2], 45);
  EXPECT_EQ(by_size[8], 45);
}

TEST(ShapCoalitions, SampledRemainderIsPairedAndSeeded) {
  const auto a = ex::shap_coalitions(30, 200, 5), b = ex::shap_coalitions(30, 200, 5);
  ASSERT_EQ(a.size(), 200u);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].on_off, b[i].on_off);
  // Sizes 1 and 29 are complete (60 rows); draws after them come in complements.
  for (std::size_t i = 62; i + 1 < a.size(); i += 2)
    for (int k = 0; k < 30; ++k) EXPECT_EQ(a[i].on_off[k] + a[i + 1].on_off[k], 1);
  const auto c = ex::shap_coalitions(30, 200, 6);
  bool differs = false;
  for (std::size_t i = 62; i < a.size(); ++i) differs |= a[i].on_off != c[i].on_off;
  EXPECT_TRUE(differs);
  EXPECT_THROW(ex::shap_coalitions(30, 20, 1), std::invalid_argument);
}

TEST(KernelShap, ExhaustiveMatchesExactShapley) {
  for (int f : {3, 6, 10, 12}) {
    const std::vector<ex::CoalitionFn> battery = {
        [](auto) { return std::vector<double>{0.7}; }, additive(std::vector<double>(f, 0.0)), random_mlp(f, f)};
    std::vector<double> w(f);
    for (int i = 0; i < f; ++i) w[i] = std::sin(1.0 + i);
    std::vector<ex::CoalitionFn> models = battery;
    models.push_back(additive(w, -1.0));
    for (const auto& model : models) {
      const auto sol = ex::kernel_shap_coalitions(model, f, 1 << f, 3, 1e-3);
      EXPECT_FALSE(sol.ridge_fallback);
      const auto exact = ex::exact_shapley(scalar(model), f);
      for (int i = 0; i < f; ++i) EXPECT_NEAR(sol.phi[0][i], exact[i], 1e-6) << "F=" << f << " i=" << i;
    }
  }
}

TEST(KernelShap, ConstantModel) {
  const auto sol = ex::kernel_shap_coalitions([](auto) { return std::vector<double>{2.5, -1.0}; }, 40, 300, 1, 1e-3);
  for (const auto& row : sol.phi)
    for (double v : row) EXPECT_NEAR(v, 0.0, 1e-12);
  EXPECT_EQ(sol.base, (std::vector<double>{2.5, -1.0}));
}

TEST(KernelShap, EfficiencyOnSampledRuns) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const int f = 25 + static_cast<int>(seed);
    const auto model = random_mlp(f, seed, 3);
    const auto sol = ex::kernel_shap_coalitions(model, f, 256, seed, 1e-3);
    for (int c = 0; c < 3; ++c) {
      const double sum = std::accumulate(sol.phi[c].begin(), sol.phi[c].end(), 0.0);
      EXPECT_LE(std::abs(sum - (sol.full[c] - sol.base[c])), 1e-6);
    }
  }
}

TEST(KernelShap, SymmetricFeaturesShareCredit) {
  // Features 0 and 1 enter only through z0 + z1.
  const ex::CoalitionFn f = [](std::span<const std::uint8_t> z) {
    const double s = z[0] + z[1];
    return std::vector<double>{s * s + 0.5 * z[2] - z[2] * z[3]};
  };
  const auto sol = ex::kernel_shap_coalitions(f, 4, 16, 1, 1e-3);
  EXPECT_NEAR(sol.phi[0][0], sol.phi[0][1], 1e-9);
  const auto big = ex::kernel_shap_coalitions(
      [](std::span<const std::uint8_t> z) {
        double s = 0;
        for (std::size_t i = 0; i < z.size(); ++i) s += z[i] * (i < 2 ? 1.0 : 0.1 * i);
        return std::vector<double>{s};
      },
      30, 500, 2, 1e-3);
  EXPECT_NEAR(big.phi[0][0], big.phi[0][1], 1e-9);
}

TEST(KernelShap, SingularDesignFallsBackToRidge) {
  // One regression row for two free coefficients.
  std::vector<ex::CoalitionSample> samples = {{{1, 1, 1}, 0.0}, {{0, 0, 0}, 0.0}, {{1, 1, 0}, 1.0}};
  const std::vector<std::vector<double>> values = {{3.0}, {0.0}, {2.0}};
  const auto sol = ex::solve_kernel_shap(samples, values, 1e-3);
  EXPECT_TRUE(sol.ridge_fallback);
  EXPECT_NEAR(sol.phi[0][0] + sol.phi[0][1] + sol.phi[0][2], 3.0, 1e-12);
}

gl::nn::NetworkState toy_state(int side, std::uint64_t seed) {
  return gl::nn::build_network(toy_spec(side), seed);
}

TEST(KernelShap, ImageLevelPerClassAttributions) {
  const auto state = toy_state(32, 4);
  const auto image = random_image(32, 32, 3, 9);
  gl::seg::SlicConfig sc;
  sc.target_segments = 16;
  const auto seg = gl::seg::slic_segment(image, sc);
  ex::ExplainerConfig cfg;
  cfg.shap_samples = 128;
  cfg.seed = 11;
  const auto model = ex::probability_model(state);
  const auto attrs = ex::kernel_shap(model, image, seg, cfg);
  ASSERT_EQ(attrs.size(), 3u);
  const auto full = model(image);
  for (int c = 0; c < 3; ++c) {
    EXPECT_EQ(attrs[c].target_class, c);
    EXPECT_EQ(attrs[c].per_segment.size(), static_cast<std::size_t>(seg.n_segments));
    const double sum = std::accumulate(attrs[c].per_segment.begin(), attrs[c].per_segment.end(), 0.0);
    EXPECT_LE(std::abs(sum - (full[c] - *attrs[c].base_value)), 1e-6);
  }
  const auto again = ex::kernel_shap(model, image, seg, cfg);
  EXPECT_EQ(again[1].per_segment, attrs[1].per_segment);
  cfg.jobs = 3;
  EXPECT_EQ(ex::kernel_shap(model, image, seg, cfg)[2].per_segment, attrs[2].per_segment);
}

TEST(Lime, ProximityKernel) {
  EXPECT_DOUBLE_EQ(ex::lime_proximity(16, 16, 1.0), 1.0);
  EXPECT_DOUBLE_EQ(ex::lime_proximity(4, 16, 1.0), std::exp(-0.25));
  EXPECT_DOUBLE_EQ(ex::lime_proximity(0, 16, 2.0), std::exp(-0.25));
  EXPECT_THROW(ex::lime_proximity(1, 4, 0.0), std::invalid_argument);
}

TEST(Lime, RecoversLinearSignPattern) {
  const int f = 100;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    gl::Rng rng(seed * 77);
    std::vector<double> w(f);
    for (double& v : w) v = rng.normal() * 0.01;
    for (int k = 0; k < 10; ++k) w[static_cast<std::size_t>(k * 9 + seed)] = (k % 2 ? 1.0 : -1.0) * (0.5 + 0.05 * k);
    ex::LimeOptions opt;
    opt.seed = seed;
    const auto fit = ex::lime_fit(additive(w, 0.2), f, 0, opt);
    ASSERT_EQ(fit.selected.size(), 10u);
    for (int i : fit.selected) {
      EXPECT_EQ(std::signbit(fit.coefficients[i]), std::signbit(w[i])) << i;
      EXPECT_GE(std::abs(w[i]), 0.5);
    }
  }
}

TEST(Lime, SeededDeterminismAndErrors) {
  const auto model = random_mlp(20, 3, 2);
  ex::LimeOptions opt;
  opt.samples = 200;
  opt.seed = 4;
  const auto a = ex::lime_fit(model, 20, 1, opt), b = ex::lime_fit(model, 20, 1, opt);
  EXPECT_EQ(a.per_segment, b.per_segment);
  opt.seed = 5;
  EXPECT_NE(ex::lime_fit(model, 20, 1, opt).coefficients, a.coefficients);
  opt.samples = 0;
  EXPECT_THROW(ex::lime_fit(model, 20, 1, opt), std::invalid_argument);
  opt.samples = 1;
  EXPECT_THROW(ex::lime_fit(model, 20, 1, opt), std::invalid_argument);
  opt.samples = 50;
  EXPECT_THROW(ex::lime_fit(model, 20, 2, opt), std::invalid_argument);
  int nonzero = 0;
  for (double v : a.per_segment) nonzero += v != 0.0;
  EXPECT_EQ(nonzero, 10);
}

TEST(Lime, ImageLevelDeterministic) {
  const auto state = toy_state(32, 2);
  const auto image = random_image(32, 32, 3, 3);
  gl::seg::SlicConfig sc;
  sc.target_segments = 16;
  const auto seg = gl::seg::slic_segment(image, sc);
  ex::ExplainerConfig cfg;
  cfg.lime_samples = 100;
  cfg.seed = 8;
  const auto model = ex::probability_model(state);
  const auto a = ex::lime_explain(model, image, seg, 2, cfg);
  EXPECT_EQ(a.method, ex::Method::kLime);
  EXPECT_EQ(a.per_segment, ex::lime_explain(model, image, seg, 2, cfg).per_segment);
}

TEST(GradCam, NonNegativeNormalizedAndDeterministic) {
  const auto state = toy_state(32, 6);
  const auto image = random_image(32, 32, 3, 1);
  const auto a = ex::grad_cam(state, image, 1);
  ASSERT_EQ(a.heatmap.width, 32);
  float peak = 0.0f;
  for (float v : a.heatmap.values) {
    EXPECT_GE(v, 0.0f);
    peak = std::max(peak, v);
  }
  EXPECT_TRUE(peak == 0.0f || peak == 1.0f);
  for (int r = 0; r < 4; ++r) EXPECT_EQ(ex::grad_cam(state, image, 1).heatmap, a.heatmap);
}

TEST(GradCam, InvariantToLogitShift) {
  auto state = toy_state(32, 7);
  const auto image = random_image(32, 32, 3, 2);
  const auto before = ex::grad_cam(state, image, 0);
  for (auto& b : state.params.back().bias.values()) b += 3.0f;
  EXPECT_EQ(ex::grad_cam(state, image, 0).heatmap, before.heatmap);
}

TEST(GradCam, ZeroGradientGivesZeroMap) {
  auto state = toy_state(32, 8);
  state.params.back().weights.fill(0.0f);
  const auto a = ex::grad_cam(state, random_image(32, 32, 3, 4), 2);
  for (float v : a.heatmap.values) EXPECT_EQ(v, 0.0f);
}

TEST(GradCam, UniformPositiveGradientReproducesActivation) {
  using namespace gl::nn;
  NetworkState state;
  state.spec.input = {4, 4, 1};
  state.spec.layers = {ConvSpec{1, 1, 1, 0, Activation::kRelu}, FlattenSpec{}, DenseSpec{2, Activation::kSoftmax}};
  state.params = zero_gradients(state.spec);
  state.params[0].weights.fill(1.0f);
  state.params[0].bias.fill(-0.2f);
  for (int i = 0; i < 16; ++i) state.params[2].weights[i * 2 + 1] = 1.0f;
  const auto image = random_image(4, 4, 1, 5);
  const auto maps = ex::grad_cam_maps(state, image, 1, 0);
  EXPECT_FLOAT_EQ(static_cast<float>(maps.alpha[0]), 1.0f);
  for (int i = 0; i < 16; ++i) EXPECT_FLOAT_EQ(maps.cam.values[i], std::max(0.0f, image[i] - 0.2f));
}

TEST(GradCam, AlphaMatchesFiniteDifferences) {
  const auto spec = toy_spec(32);
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto state = gl::nn::build_network(spec, seed);
    const auto image = random_image(32, 32, 3, seed + 10);
    const std::size_t layer = ex::last_conv_layer(spec);
    ASSERT_EQ(layer, 4u);
    const auto p = gl::testing::to_ref(state.params);
    for (int c = 0; c < 3; ++c) {
      const auto maps = ex::grad_cam_maps(state, image, c, layer);
      const auto base = gl::testing::to_ref(maps.activation);
      const double z = static_cast<double>(base.h) * base.w;
      for (int k = 0; k < base.c; ++k) {
        const double h = 1e-4;
        auto up = base, down = base;
        for (int y = 0; y < base.h; ++y)
          for (int x = 0; x < base.w; ++x) {
            up.at(y, x, k) += h;
            down.at(y, x, k) -= h;
          }
        const double numeric =
            (gl::testing::ref_logits(spec, p, up, layer + 1)[c] - gl::testing::ref_logits(spec, p, down, layer + 1)[c]) /
            (2 * h) / z;
        EXPECT_LE(gl::testing::relative_error(maps.alpha[k], numeric), 1e-3)
            << "seed " << seed << " class " << c << " map " << k << ": " << maps.alpha[k] << " vs " << numeric;
      }
    }
  }
}

TEST(GradCam, RejectsNonConvLayerAndBadClass) {
  const auto state = toy_state(32, 1);
  const auto image = random_image(32, 32, 3, 1);
  EXPECT_THROW(ex::grad_cam(state, image, 0, 1), std::invalid_argument);
  EXPECT_THROW(ex::grad_cam(state, image, 0, 6), std::invalid_argument);
  EXPECT_THROW(ex::grad_cam(state, image, 3), std::invalid_argument);
}

TEST(Upsample, Examples) {
  const auto c = ex::upsample_bilinear(ex::Heatmap(5, 7, 0.3f), 224, 224);
  for (float v : c.values) EXPECT_EQ(v, 0.3f);
  ex::Heatmap ramp(2, 2);
  ramp.values = {0, 1, 0, 1};
  const auto r = ex::upsample_bilinear(ramp, 5, 3);
  for (int y = 0; y < 3; ++y)
    for (int x = 0; x < 5; ++x) EXPECT_FLOAT_EQ(r.at(x, y), x / 4.0f);
  ex::Heatmap m(3, 3);
  m.values = {1, 2, 3, 4, 5, 6, 7, 8, 9};
  const auto u = ex::upsample_bilinear(m, 224, 224);
  EXPECT_EQ(u.at(0, 0), 1.0f);
  EXPECT_EQ(u.at(223, 0), 3.0f);
  EXPECT_EQ(u.at(0, 223), 7.0f);
  EXPECT_EQ(u.at(223, 223), 9.0f);
  EXPECT_THROW(ex::upsample_bilinear(ex::Heatmap(1, 3), 4, 4), std::invalid_argument);
}

TEST(SegmentHeatmap, Examples) {
  const auto image = random_image(64, 64, 3, 2);
  gl::seg::SlicConfig sc;
  sc.target_segments = 20;
  const auto seg = gl::seg::slic_segment(image, sc);
  const auto uniform = ex::attribution_to_heatmap(std::vector<double>(seg.n_segments, 0.5), seg);
  for (float v : uniform.values) EXPECT_EQ(v, 0.5f);
  std::vector<double> one(seg.n_segments, 0.0);
  one[3] = -2.0;
  const auto h1 = ex::attribution_to_heatmap(one, seg);
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 64; ++x) EXPECT_EQ(h1.at(x, y) != 0.0f, seg.at(x, y) == 3);
  std::vector<double> scores(seg.n_segments);
  for (int i = 0; i < seg.n_segments; ++i) scores[i] = 0.25 * i - 1.0;
  const auto h = ex::attribution_to_heatmap(scores, seg);
  const auto sizes = seg.sizes();
  double expected = 0.0, total = 0.0;
  for (int i = 0; i < seg.n_segments; ++i) expected += scores[i] * sizes[i];
  for (float v : h.values) total += v;
  EXPECT_NEAR(total, expected, 1e-6);
  EXPECT_THROW(ex::attribution_to_heatmap(scores, gl::seg::SegmentationMap{}), std::invalid_argument);
}

TEST(Report, GrayMappingAndKeys) {
  ex::Heatmap m(2, 1);
  m.values = {-1.0f, 3.0f};
  const auto g = ex::heatmap_to_gray(m);
  EXPECT_EQ(g.image.pixels, (std::vector<std::uint8_t>{0, 255}));
  EXPECT_EQ(g.min, -1.0);
  ex::Attribution a;
  a.method = ex::Method::kKernelShap;
  a.target_class = 2;
  a.per_segment = {0.5, -0.25};
  a.base_value = 0.125;
  const auto text = ex::format_attribution(a, g);
  EXPECT_NE(text.find("method: kernel_shap\nclass: 2\n"), std::string::npos);
  EXPECT_NE(text.find("score_1: -0.25\n"), std::string::npos);
  EXPECT_NE(text.find("heatmap_max: 3\n"), std::string::npos);
  EXPECT_EQ(ex::parse_method("shap"), ex::Method::kKernelShap);
  EXPECT_FALSE(ex::parse_method("deep_shap"));
}

}  // namespace
