#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "gradlens/nn/adam.hpp"
#include "gradlens/nn/loss.hpp"
#include "gradlens/nn/network.hpp"
#include "gradlens/nn/trainer.hpp"
#include "gradlens/nn/weights_io.hpp"
#include "gradcheck.hpp"
#include "temp_dir.hpp"

namespace gl = gradlens;
namespace nn = gradlens::nn;
using gl::Tensor;

namespace {

Tensor ones(std::vector<int> shape) { return Tensor(std::move(shape), 1.0f); }

TEST(Spec, ParameterCountsPerLayer) {
  const auto spec = nn::mammo_cnn_spec();
  EXPECT_EQ(nn::parameter_count(spec), 1386177u);
  std::vector<std::size_t> nonzero;
  for (auto c : nn::layer_parameter_counts(spec)) {
    if (c) nonzero.push_back(c);
  }
  const std::vector<std::size_t> expected = {1216, 6416, 2030, 1211904, 131328, 32896, 387};
  EXPECT_EQ(nonzero, expected);
  EXPECT_EQ(nn::build_network(spec, 1).parameter_count(), 1386177u);
}

TEST(Spec, NoParameterLayersCountZero) {
  nn::NetworkSpec s{{8, 8, 1}, {nn::PoolSpec{2, 2}, nn::FlattenSpec{}}};
  EXPECT_EQ(nn::parameter_count(s), 0u);
  EXPECT_EQ(nn::build_network(s, 3).parameter_count(), 0u);
}

TEST(Spec, OutputShapes) {
  const auto shapes = nn::layer_output_shapes(nn::mammo_cnn_spec());
  const std::vector<nn::Shape3> expected = {
      {220, 220, 16}, {110, 110, 16}, {106, 106, 16}, {53, 53, 16}, {53, 53, 14}, {26, 26, 14},
      {13, 13, 14},   {1, 1, 2366},   {1, 1, 512},    {1, 1, 256},  {1, 1, 128},  {1, 1, 128},
      {1, 1, 3}};
  EXPECT_EQ(shapes, expected);
}

TEST(Spec, RejectsFirstBadLayer) {
  nn::NetworkSpec s{{10, 10, 3}, {nn::ConvSpec{4, 3}, nn::PoolSpec{2, 2}, nn::ConvSpec{4, 7}, nn::FlattenSpec{}}};
  try {
    nn::build_network(s, 0);
    FAIL() << "expected SpecError";
  } catch (const nn::SpecError& e) {
    EXPECT_EQ(e.layer(), 2u);
  }
}

TEST(Spec, LayerLinesRoundTrip) {
  for (const auto& layer : nn::mammo_cnn_spec().layers) {
    EXPECT_EQ(nn::parse_layer(nn::format_layer(layer)), layer);
  }
  EXPECT_EQ(nn::format_layer(nn::ConvSpec{16, 5, 1, 0}), "conv 16 5 1 0 relu");
}

TEST(HeInit, VarianceAndZeroBias) {
  const auto state = nn::build_network(nn::mammo_cnn_spec(), 42);
  const auto& dense1 = state.params[8];
  double sum = 0.0, sq = 0.0;
  for (float v : dense1.weights.values()) {
    sum += v;
    sq += static_cast<double>(v) * v;
  }
  const double n = static_cast<double>(dense1.weights.size());
  EXPECT_NEAR(sum / n, 0.0, 1e-3);
  EXPECT_NEAR(sq / n, 2.0 / 2366.0, 0.02 * 2.0 / 2366.0);
  for (const auto& p : state.params) {
    for (float b : p.bias.values()) EXPECT_EQ(b, 0.0f);
  }
}

TEST(Conv, OutputShapeOfFirstLayer) {
  const auto w = Tensor({5, 5, 3, 16});
  const auto out = nn::conv2d(Tensor({224, 224, 3}), w, Tensor({16}), 1, 0, nn::Activation::kRelu);
  EXPECT_EQ(out.shape(), (std::vector<int>{220, 220, 16}));
}

TEST(Conv, UnitKernelIsIdentity) {
  const auto img = gl::testing::random_image(7, 9, 1, 5);
  const auto out = nn::conv2d(img, ones({1, 1, 1, 1}), Tensor({1}), 1, 0, nn::Activation::kNone);
  EXPECT_EQ(out, img);
}

TEST(Conv, AllOnesKernel) {
  const auto out = nn::conv2d(ones({3, 3, 1}), ones({3, 3, 1, 1}), Tensor({1}), 1, 0, nn::Activation::kNone);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_FLOAT_EQ(out[0], 9.0f);
}

TEST(Conv, KernelLargerThanInputRejected) {
  EXPECT_THROW(nn::conv2d(ones({3, 3, 1}), ones({5, 5, 1, 1}), Tensor({1}), 1, 0, nn::Activation::kNone),
               std::invalid_argument);
  EXPECT_THROW(nn::conv2d(ones({5, 5, 2}), ones({3, 3, 1, 1}), Tensor({1}), 1, 0, nn::Activation::kNone),
               std::invalid_argument);
}

TEST(Conv, MatchesReferenceWithPaddingAndStride) {
  for (int stride : {1, 2}) {
    for (int pad : {0, 1, 2}) {
      const auto img = gl::testing::random_image(13, 11, 5, 10 + stride * 3 + pad);
      auto w = gl::testing::random_image(3, 3, 5 * 19, 99);
      w = Tensor({3, 3, 5, 19}, std::vector<float>(w.values().begin(), w.values().end()));
      auto b = gl::testing::random_image(1, 1, 19, 7);
      b = Tensor({19}, std::vector<float>(b.values().begin(), b.values().end()));
      const auto out = nn::conv2d(img, w, b, stride, pad, nn::Activation::kNone);
      nn::NetworkSpec s{{13, 11, 5}, {nn::ConvSpec{19, 3, stride, pad, nn::Activation::kNone}}};
      gl::testing::RefParams p;
      p.weights = {{w.values().begin(), w.values().end()}};
      p.bias = {{b.values().begin(), b.values().end()}};
      const auto ref = gl::testing::ref_logits(s, p, gl::testing::to_ref(img));
      ASSERT_EQ(ref.size(), out.size());
      for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_NEAR(out[i], ref[i], 1e-4) << i;
    }
  }
}

TEST(MaxPool, ShapesAndFloor) {
  EXPECT_EQ(nn::maxpool2d(Tensor({220, 220, 16}), 2, 2, nullptr).shape(), (std::vector<int>{110, 110, 16}));
  EXPECT_EQ(nn::maxpool2d(Tensor({53, 53, 14}), 2, 2, nullptr).shape(), (std::vector<int>{26, 26, 14}));
}

TEST(MaxPool, ConstantImage) {
  const auto out = nn::maxpool2d(Tensor({6, 6, 2}, 0.25f), 2, 2, nullptr);
  for (float v : out.values()) EXPECT_EQ(v, 0.25f);
}

TEST(MaxPool, SelectsWindowMaximum) {
  Tensor t({2, 2, 1}, std::vector<float>{1, 5, 3, 2});
  std::vector<std::int32_t> idx;
  const auto out = nn::maxpool2d(t, 2, 2, &idx);
  EXPECT_EQ(out[0], 5.0f);
  const auto back = nn::maxpool2d_backward(Tensor({1, 1, 1}, 1.0f), idx, t.shape());
  EXPECT_EQ(back.values()[1], 1.0f);
  EXPECT_EQ(std::accumulate(back.values().begin(), back.values().end(), 0.0f), 1.0f);
}

TEST(Dense, IdentityAndConstant) {
  const int n = 4;
  Tensor eye({n, n});
  for (int i = 0; i < n; ++i) eye[i * n + i] = 1.0f;
  Tensor x({n}, std::vector<float>{1, -2, 3, 0.5f});
  EXPECT_EQ(nn::dense(x, eye, Tensor({n}), nn::Activation::kNone), x);
  Tensor b({n}, std::vector<float>{7, 8, 9, 10});
  EXPECT_EQ(nn::dense(x, Tensor({n, n}), b, nn::Activation::kNone), b);
  EXPECT_THROW(nn::dense(Tensor({3}), eye, b, nn::Activation::kNone), std::invalid_argument);
}

TEST(Dense, FlattenToFirstDense) {
  const auto state = nn::build_network(nn::mammo_cnn_spec(), 2);
  EXPECT_EQ(state.params[8].weights.shape(), (std::vector<int>{2366, 512}));
  const auto trace = nn::forward(state, gl::testing::random_image(224, 224, 3, 1));
  EXPECT_EQ(trace.outputs[8].size(), 512u);
}

TEST(Softmax, Examples) {
  auto p = nn::softmax(Tensor({3}, std::vector<float>{0, 0, 0}));
  for (float v : p.values()) EXPECT_NEAR(v, 1.0 / 3.0, 1e-7);
  p = nn::softmax(Tensor({3}, std::vector<float>{0, 0, static_cast<float>(std::log(2.0))}));
  EXPECT_NEAR(p[0], 0.25, 1e-7);
  EXPECT_NEAR(p[1], 0.25, 1e-7);
  EXPECT_NEAR(p[2], 0.5, 1e-7);
}

TEST(Softmax, ShiftInvariantAndNormalized) {
  gl::Rng rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    Tensor z({3});
    for (auto& v : z.values()) v = static_cast<float>(rng.uniform(-20, 20));
    Tensor shifted = z;
    const float c = static_cast<float>(rng.uniform(-50, 50));
    for (auto& v : shifted.values()) v += c;
    const auto a = nn::softmax(z), b = nn::softmax(shifted);
    double sum = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
      sum += a[i];
      EXPECT_GT(a[i], 0.0f);
      EXPECT_NEAR(a[i], b[i], 1e-5);
    }
    EXPECT_NEAR(sum, 1.0, 1e-6);
  }
  const auto big = nn::softmax(Tensor({3}, std::vector<float>{1000, 0, -1000}));
  EXPECT_TRUE(big.all_finite());
}

TEST(Dropout, InferenceAndZeroRateAreIdentity) {
  const auto x = gl::testing::random_image(1, 1, 100, 3);
  gl::Rng rng(1);
  EXPECT_EQ(nn::dropout(x, 0.5f, nn::Mode::kInference, &rng, nullptr), x);
  EXPECT_EQ(nn::dropout(x, 0.0f, nn::Mode::kTraining, &rng, nullptr), x);
  EXPECT_EQ(nn::dropout(x, 0.0f, nn::Mode::kInference, &rng, nullptr), x);
}

TEST(Dropout, KeptFractionAndScale) {
  const Tensor x({10000}, 1.0f);
  gl::Rng rng(2024);
  std::vector<float> scale;
  const auto y = nn::dropout(x, 0.5f, nn::Mode::kTraining, &rng, &scale);
  int kept = 0;
  for (float v : y.values()) {
    if (v != 0.0f) {
      ++kept;
      EXPECT_EQ(v, 2.0f);
    }
  }
  EXPECT_GE(kept, 4800);
  EXPECT_LE(kept, 5200);
}

TEST(Loss, Examples) {
  const nn::ClassWeights w = {1, 2, 3};
  const auto perfect = nn::weighted_cross_entropy(Tensor({3}, std::vector<float>{0, 1, 0}), 1, w);
  EXPECT_EQ(perfect.loss, 0.0);
  const float third = 1.0f / 3.0f;
  const Tensor uniform({3}, std::vector<float>{third, third, third});
  EXPECT_NEAR(nn::weighted_cross_entropy(uniform, 2, w).loss, 3.0 * std::log(3.0), 1e-6);
  const auto g = nn::weighted_cross_entropy(uniform, 2, w).grad_logits;
  EXPECT_NEAR(g[0], 3.0 * third, 1e-6);
  EXPECT_NEAR(g[2], 3.0 * (third - 1.0), 1e-6);
}

TEST(Loss, UnitWeightsEqualPlainCrossEntropy) {
  gl::Rng rng(5);
  const nn::ClassWeights unit = {1, 1, 1};
  for (int trial = 0; trial < 50; ++trial) {
    Tensor z({3});
    for (auto& v : z.values()) v = static_cast<float>(rng.uniform(-5, 5));
    const auto p = nn::softmax(z);
    const int label = static_cast<int>(rng.below(3));
    EXPECT_EQ(nn::weighted_cross_entropy(p, label, unit).loss, -std::log(static_cast<double>(p[label])));
  }
}

TEST(Loss, ClampsZeroProbability) {
  const auto r = nn::weighted_cross_entropy(Tensor({3}, std::vector<float>{1, 0, 0}), 2, nn::ClassWeights{1, 1, 1});
  EXPECT_NEAR(r.loss, -std::log(1e-12), 1e-9);
}

TEST(Backprop, ZeroUpstreamGivesZeroGradients) {
  const auto spec = gl::testing::toy_spec(10);
  const auto state = nn::build_network(spec, 9);
  const auto trace = nn::forward(state, gl::testing::random_image(10, 10, 3, 4));
  nn::BackpropOptions opts;
  opts.capture_layers = {0, 2};
  const auto g = nn::backprop(state, trace, Tensor({3}), opts);
  for (const auto& p : g.params) {
    for (float v : p.weights.values()) EXPECT_EQ(v, 0.0f);
    for (float v : p.bias.values()) EXPECT_EQ(v, 0.0f);
  }
  for (const auto& [layer, t] : g.activations) {
    for (float v : t.values()) EXPECT_EQ(v, 0.0f);
  }
}

TEST(Backprop, FiniteDifferencesOnToyNet) {
  const auto spec = gl::testing::toy_spec(10);
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto state = nn::build_network(spec, seed);
    const auto img = gl::testing::random_image(10, 10, 3, seed + 100);
    const auto r = gl::testing::check_gradients(state, img, {0.3, -1.1, 0.8}, 1e-3, {0, 2}, false);
    EXPECT_LE(r.max_rel_error, 1e-3) << r.worst;
    EXPECT_GT(r.checked, 100u);
    EXPECT_LT(r.kinks * 10, r.checked) << r.kinks << " non-differentiable points";
  }
}

TEST(Backprop, FiniteDifferencesWithDropoutMask) {
  const auto spec = gl::testing::toy_spec(10);
  auto state = nn::build_network(spec, 17);
  state.training = true;
  const auto img = gl::testing::random_image(10, 10, 3, 18);
  const auto r = gl::testing::check_gradients(state, img, {1.0, 0.5, -2.0}, 1e-3, {}, true);
  EXPECT_LE(r.max_rel_error, 1e-3) << r.worst;
}

TEST(Backprop, ConvThreeActivationGradientShape) {
  const auto state = nn::build_network(nn::mammo_cnn_spec(), 3);
  const auto trace = nn::forward(state, gl::testing::random_image(224, 224, 3, 8));
  nn::BackpropOptions opts;
  opts.parameter_gradients = false;
  opts.capture_layers = {4};
  const auto g = nn::backprop(state, trace, Tensor({3}, std::vector<float>{0, 1, 0}), opts);
  EXPECT_EQ(g.activations.at(4).shape(), (std::vector<int>{53, 53, 14}));
  EXPECT_TRUE(g.params.empty());
}

TEST(Backprop, RejectsForeignTrace) {
  const auto a = nn::build_network(gl::testing::toy_spec(10), 1);
  const auto b = nn::build_network(gl::testing::toy_spec(32), 1);
  const auto trace = nn::forward(b, gl::testing::random_image(32, 32, 3, 1));
  EXPECT_THROW(nn::backprop(a, trace, Tensor({3})), std::invalid_argument);
}

TEST(Adam, ZeroGradientLeavesParamsUnchanged) {
  Tensor p({5}, std::vector<float>{1, 2, 3, 4, 5});
  const Tensor before = p;
  Tensor g({5});
  nn::OptimizerState opt;
  std::vector<Tensor*> ps = {&p};
  std::vector<const Tensor*> gs = {&g};
  nn::adam_step(opt, ps, gs);
  EXPECT_EQ(p, before);
  EXPECT_EQ(opt.step, 1);
}

TEST(Adam, FirstStepIsSignTimesLearningRate) {
  Tensor p({4}, std::vector<float>{0, 0, 0, 0});
  Tensor g({4}, std::vector<float>{3.0f, -0.02f, 1e-3f, -50.0f});
  nn::OptimizerState opt;
  EXPECT_EQ(opt.config.learning_rate, 1e-4);
  EXPECT_EQ(opt.config.beta1, 0.9);
  EXPECT_EQ(opt.config.beta2, 0.999);
  EXPECT_EQ(opt.config.epsilon, 1e-8);
  std::vector<Tensor*> ps = {&p};
  std::vector<const Tensor*> gs = {&g};
  nn::adam_step(opt, ps, gs);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_LE(std::abs(p[i]), 1e-4 * (1 + 1e-5));
    EXPECT_NEAR(p[i], g[i] > 0 ? -1e-4 : 1e-4, 1e-8);
  }
}

TEST(Adam, MatchesScalarRecurrence) {
  Tensor p({1}, std::vector<float>{0.5f});
  nn::OptimizerState opt;
  opt.config.learning_rate = 0.01;
  double w = 0.5, m = 0, v = 0;
  const double grads[] = {0.3, -0.1, 0.7, 0.2};
  for (int t = 1; t <= 4; ++t) {
    Tensor g({1}, std::vector<float>{static_cast<float>(grads[t - 1])});
    std::vector<Tensor*> ps = {&p};
    std::vector<const Tensor*> gs = {&g};
    nn::adam_step(opt, ps, gs);
    m = 0.9 * m + 0.1 * grads[t - 1];
    v = 0.999 * v + 0.001 * grads[t - 1] * grads[t - 1];
    w -= 0.01 * (m / (1 - std::pow(0.9, t))) / (std::sqrt(v / (1 - std::pow(0.999, t))) + 1e-8);
    EXPECT_NEAR(p[0], w, 1e-6);
  }
}

TEST(EarlyStopping, PaperScheduleBestFourteenStopsAtTwentyFour) {
  nn::EarlyStopping s(10);
  int stopped_at = 0;
  for (int epoch = 1; epoch <= 50; ++epoch) {
    const double loss = epoch <= 14 ? 2.0 - 0.1 * epoch : 0.7 + 0.01 * epoch;
    s.update(epoch, loss);
    if (s.should_stop()) {
      stopped_at = epoch;
      break;
    }
  }
  EXPECT_EQ(s.best_epoch(), 14);
  EXPECT_EQ(stopped_at, 24);
}

TEST(EarlyStopping, StrictlyImprovingNeverStops) {
  nn::EarlyStopping s(10);
  for (int epoch = 1; epoch <= 50; ++epoch) {
    EXPECT_TRUE(s.update(epoch, 100.0 - epoch));
    EXPECT_FALSE(s.should_stop());
  }
  EXPECT_EQ(s.best_epoch(), 50);
}

TEST(EarlyStopping, PatienceZeroStopsAfterFirstWorseEpoch) {
  nn::EarlyStopping s(0);
  s.update(1, 1.0);
  EXPECT_FALSE(s.should_stop());
  s.update(2, 1.5);
  EXPECT_TRUE(s.should_stop());
  EXPECT_EQ(s.best_epoch(), 1);
}

std::vector<nn::Example> toy_examples(int n, std::uint64_t seed) {
  std::vector<nn::Example> out;
  gl::Rng rng(seed);
  for (int i = 0; i < n; ++i) {
    const int label = i % 3;
    Tensor img({10, 10, 3});
    for (auto& v : img.values()) v = static_cast<float>(0.2 * rng.uniform() + 0.35 * label);
    out.push_back({std::move(img), label});
  }
  return out;
}

TEST(Fit, BitReproducibleAndRestoresBest) {
  const auto spec = gl::testing::toy_spec(10);
  const auto train = toy_examples(24, 1);
  const auto val = toy_examples(9, 2);
  nn::TrainConfig cfg;
  cfg.max_epochs = 6;
  cfg.learning_rate = 1e-2;
  cfg.batch_size = 4;
  cfg.seed = 77;
  auto a = nn::build_network(spec, 5);
  auto b = nn::build_network(spec, 5);
  const auto ha = nn::fit(a, train, val, cfg);
  const auto hb = nn::fit(b, train, val, cfg);
  EXPECT_EQ(a.params, b.params);
  EXPECT_FALSE(a.training);
  ASSERT_EQ(ha.epochs_run(), hb.epochs_run());
  double best = 1e300;
  int best_epoch = 0;
  for (const auto& e : ha.epochs) {
    if (e.val_loss < best) {
      best = e.val_loss;
      best_epoch = e.epoch;
    }
  }
  EXPECT_EQ(ha.best_epoch, best_epoch);
  EXPECT_DOUBLE_EQ(nn::evaluate(a, val).loss, best);
}

TEST(Fit, RejectsEmptyTrainingSet) {
  auto state = nn::build_network(gl::testing::toy_spec(10), 1);
  const auto val = toy_examples(3, 1);
  EXPECT_THROW(nn::fit(state, {}, val, nn::TrainConfig{}), std::invalid_argument);
}

TEST(Predict, NormalizedDeterministicAndShapeChecked) {
  auto state = nn::build_network(nn::mammo_cnn_spec(), 21);
  state.training = true;
  const auto img = gl::testing::random_image(224, 224, 3, 22);
  const auto a = nn::predict(state, img);
  const auto b = nn::predict(state, img);
  EXPECT_EQ(a.probabilities, b.probabilities);
  EXPECT_NEAR(std::accumulate(a.probabilities.begin(), a.probabilities.end(), 0.0), 1.0, 1e-6);
  EXPECT_THROW(nn::predict(state, Tensor({224, 224, 1})), std::invalid_argument);
  const auto again = nn::predict(nn::build_network(nn::mammo_cnn_spec(), 21), img);
  EXPECT_EQ(again.probabilities, a.probabilities);
}

TEST(Predict, ArgmaxTiesToLowestIndex) {
  const std::vector<float> v = {0.4f, 0.4f, 0.2f};
  EXPECT_EQ(nn::argmax(v), 0);
  const std::vector<float> w = {0.2f, 0.4f, 0.4f};
  EXPECT_EQ(nn::argmax(w), 1);
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

TEST(WeightsIo, RoundTripIsByteIdentical) {
  gl::testing::TempDir dir;
  const auto state = nn::build_network(nn::mammo_cnn_spec(), 31);
  nn::save_weights(state, dir / "a.bin");
  const auto loaded = nn::load_weights(dir / "a.bin");
  EXPECT_EQ(loaded.params, state.params);
  EXPECT_EQ(loaded.spec, state.spec);
  nn::save_weights(loaded, dir / "b.bin");
  EXPECT_EQ(slurp(dir / "a.bin"), slurp(dir / "b.bin"));
  EXPECT_EQ(slurp(dir / "a.bin").rfind("GRADLENS-W v1\ninput 224 224 3\nconv 16 5 1 0 relu\n", 0), 0u);
}

TEST(WeightsIo, DistinctErrors) {
  gl::testing::TempDir dir;
  const auto state = nn::build_network(gl::testing::toy_spec(10), 1);
  nn::save_weights(state, dir / "w.bin");
  const std::string good = slurp(dir / "w.bin");
  const auto kind_of = [&](const std::string& bytes, const nn::NetworkSpec* expected) {
    std::ofstream(dir / "x.bin", std::ios::binary) << bytes;
    try {
      if (expected) {
        nn::load_weights(dir / "x.bin", *expected);
      } else {
        nn::load_weights(dir / "x.bin");
      }
    } catch (const nn::WeightsError& e) {
      return std::make_pair(e.kind(), std::string(e.what()));
    }
    return std::make_pair(nn::WeightsError::Kind::kIo, std::string("no error"));
  };
  std::string bad = good;
  bad[0] = 'X';
  auto [k1, m1] = kind_of(bad, nullptr);
  EXPECT_EQ(k1, nn::WeightsError::Kind::kBadMagic);
  EXPECT_NE(m1.find("bad magic"), std::string::npos);
  EXPECT_EQ(kind_of(good.substr(0, good.size() - 3), nullptr).first, nn::WeightsError::Kind::kTruncated);
  EXPECT_EQ(kind_of(good + "xxxx", nullptr).first, nn::WeightsError::Kind::kTrailingData);
  auto other = gl::testing::toy_spec(10);
  std::get<nn::DenseSpec>(other.layers[5]).units = 7;
  auto [k2, m2] = kind_of(good, &other);
  EXPECT_EQ(k2, nn::WeightsError::Kind::kShapeMismatch);
  EXPECT_NE(m2.find("shape mismatch at layer 5"), std::string::npos);
  EXPECT_THROW(nn::load_weights(dir / "missing.bin"), nn::WeightsError);
}

}  // namespace
