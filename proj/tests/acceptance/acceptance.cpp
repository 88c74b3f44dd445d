// Acceptance checks 1-12. With no arguments every criterion runs; otherwise
// only the listed numbers. Exit status: 0 when every selected criterion
// passed, 1 when any failed, 77 when all were skipped.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "coalition_models.hpp"
#include "gradcheck.hpp"
#include "gradlens/eval/bench.hpp"
#include "gradlens/eval/metrics.hpp"
#include "gradlens/explain/gradcam.hpp"
#include "gradlens/explain/lime.hpp"
#include "gradlens/explain/shapley.hpp"
#include "gradlens/nn/spec.hpp"
#include "gradlens/nn/trainer.hpp"
#include "gradlens/prep/augment.hpp"
#include "gradlens/prep/dataset.hpp"
#include "gradlens/prep/synthetic.hpp"
#include "gradlens/rng.hpp"

namespace gl = gradlens;
namespace ex = gradlens::explain;
namespace ev = gradlens::eval;
namespace nn = gradlens::nn;
namespace prep = gradlens::prep;

namespace {

enum class Status { kPass, kFail, kSkip };

struct Outcome {
  Status status = Status::kFail;
  std::string detail;
};

Outcome verdict(bool ok, const std::string& detail) { return {ok ? Status::kPass : Status::kFail, detail}; }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

const char* mias_dir() {
  const char* d = std::getenv("GRADLENS_MIAS_DIR");
  return d && *d ? d : nullptr;
}

Outcome shapley_oracle() {
  double worst = 0.0;
  int models = 0;
  bool fallback = false;
  for (int f : {3, 6, 10, 12}) {
    std::vector<double> w(f);
    for (int i = 0; i < f; ++i) w[i] = std::sin(1.0 + i);
    const std::vector<ex::CoalitionFn> battery = {[](auto) { return std::vector<double>{0.7}; },
                                                  gl::testing::additive(w, -1.0),
                                                  gl::testing::random_mlp(f, 100 + f)};
    for (const auto& model : battery) {
      const auto sol = ex::kernel_shap_coalitions(model, f, 1 << f, 3, 1e-3);
      fallback = fallback || sol.ridge_fallback;
      const auto exact = ex::exact_shapley([&](std::span<const std::uint8_t> z) { return model(z)[0]; }, f);
      for (int i = 0; i < f; ++i) worst = std::max(worst, std::abs(sol.phi[0][i] - exact[i]));
      ++models;
    }
  }
  return verdict(worst <= 1e-6 && !fallback,
                 std::to_string(models) + " models, max |phi - exact| = " + fmt("%.3g", worst) + " (tol 1e-6)");
}

Outcome hand_shapley() {
  const auto phi = ex::exact_shapley(
      [](std::span<const std::uint8_t> z) {
        static const double v[4] = {0, 1, 2, 4};
        return v[z[0] + 2 * z[1]];
      },
      2);
  return verdict(phi[0] == 1.5 && phi[1] == 2.5, "phi = (" + fmt("%.17g", phi[0]) + ", " + fmt("%.17g", phi[1]) + ")");
}

Outcome gradient_check() {
  const auto spec = gl::testing::toy_spec(32);
  const std::size_t conv3 = 4;
  double worst = 0.0;
  std::size_t checked = 0, kinks = 0;
  std::string where;
  for (std::uint64_t seed : {1u, 2u}) {
    const auto state = nn::build_network(spec, seed);
    const auto image = gl::testing::random_image(32, 32, 3, seed + 50);
    const auto r = gl::testing::check_gradients(state, image, {0.4, -1.2, 0.9}, 1e-3, {conv3}, false);
    checked += r.checked;
    kinks += r.kinks;
    if (r.max_rel_error >= worst) {
      worst = r.max_rel_error;
      where = r.worst;
    }
  }
  const bool ok = worst <= 1e-3 && checked > 0 && kinks * 10 < checked;
  return verdict(ok, std::to_string(checked) + " derivatives (" + std::to_string(kinks) +
                         " non-differentiable points skipped), max relative error " + fmt("%.3g", worst) +
                         " (tol 1e-3)" + (ok ? "" : " at " + where));
}

Outcome gradcam_determinism() {
  const auto state = nn::build_network(nn::mammo_cnn_spec(), 1);
  prep::SyntheticConfig sc;
  const auto image = prep::synthetic_sample(2, 0, sc).image;
  const int target = nn::predict(state, image).label;
  const auto first = ex::grad_cam(state, image, target).heatmap;
  int identical = 1;
  for (int i = 1; i < 5; ++i) {
    const auto h = ex::grad_cam(state, image, target).heatmap;
    identical += h.width == first.width && h.height == first.height &&
                 std::memcmp(h.values.data(), first.values.data(), h.values.size() * sizeof(float)) == 0;
  }
  return verdict(identical == 5, std::to_string(identical) + " of 5 heatmaps byte-identical");
}

Outcome runtime_ordering() {
  const auto state = nn::build_network(nn::mammo_cnn_spec(), 1);
  prep::SyntheticConfig sc;
  std::vector<ev::BenchImage> images;
  for (int i = 0; i < 10; ++i) {
    const auto s = prep::synthetic_sample(i % 3, i / 3, sc);
    images.push_back({s.id, s.label, s.image, {}});
  }
  ev::BenchConfig cfg;
  cfg.robustness = false;
  cfg.iou = false;
  const auto report = ev::run_bench(state, images, cfg);
  std::string detail = "seconds/image:";
  for (const auto& m : report.methods) detail += std::string(" ") + ex::method_name(m.method) + " " + fmt("%.3f", m.seconds_per_image);
  return verdict(report.ordering_holds.value_or(false), detail);
}

Outcome majority_baseline() {
  std::vector<int> truths;
  for (int c = 0; c < 3; ++c) truths.insert(truths.end(), std::array<int, 3>{31, 9, 8}[c], c);
  const auto preds = ev::majority_predictions(truths);
  const auto m = ev::metrics(ev::confusion_matrix(truths, preds));
  const auto r2 = [](double v) { return std::round(v * 100.0) / 100.0; };
  const bool ok = r2(m.accuracy) == 0.65 && r2(m.balanced_accuracy) == 0.33 && r2(m.macro_precision) == 0.0 &&
                  r2(m.macro_f1) == 0.0;
  return verdict(ok, "accuracy " + fmt("%.4f", m.accuracy) + ", balanced accuracy " + fmt("%.4f", m.balanced_accuracy) +
                         ", macro precision " + fmt("%.4f", m.macro_precision) + ", macro F1 " +
                         fmt("%.4f", m.macro_f1) + " (expected 0.65, 0.33, 0.00, 0.00)");
}

Outcome architecture() {
  const auto spec = nn::mammo_cnn_spec();
  // Parameter column of the architecture table, in layer order.
  const std::vector<std::size_t> table = {1216, 0, 6416, 0, 2030, 0, 0, 0, 1211904, 131328, 32896, 0, 387};
  const auto counts = nn::layer_parameter_counts(spec);
  const std::size_t total = nn::parameter_count(spec);
  return verdict(counts == table && total == 1386177u,
                 "total " + std::to_string(total) + ", per-layer counts " + (counts == table ? "match" : "differ"));
}

Outcome synthetic_training() {
  prep::SyntheticConfig sc;
  sc.per_class = 150;
  sc.seed = 1;
  const auto samples = prep::synthetic_dataset(sc);
  const auto manifest = prep::plan_dataset("synthetic", samples, {}, 1);
  std::map<std::string, const prep::ProcessedSample*> by_id;
  for (const auto& s : samples) by_id[s.id] = &s;
  const auto subset = [&](prep::Split split) {
    std::vector<const prep::ProcessedSample*> out;
    for (const auto& id : manifest.split.of(split)) out.push_back(by_id.at(id));
    return prep::SampleSet(out);
  };
  const auto train = subset(prep::Split::kTrain), val = subset(prep::Split::kValidation),
             test = subset(prep::Split::kTest);
  auto state = nn::build_network(nn::mammo_cnn_spec(), gl::derive_seed(1, "init"));
  nn::TrainConfig tc;
  tc.max_epochs = 20;
  tc.seed = gl::derive_seed(1, "train");
  const auto history = nn::fit(state, train, val, tc);
  const double acc = nn::evaluate(state, test).accuracy;
  return verdict(acc >= 0.90, "test accuracy " + fmt("%.4f", acc) + " on " + std::to_string(test.size()) +
                                  " images after " + std::to_string(history.epochs_run()) + " epochs (best epoch " +
                                  std::to_string(history.best_epoch) + ", need >= 0.90)");
}

Outcome mias_soft_check() {
  const char* dir = mias_dir();
  if (!dir) return {Status::kSkip, "GRADLENS_MIAS_DIR not set"};
  prep::PreprocessConfig pc;
  pc.mias_dir = dir;
  const auto data = prep::preprocess_mias(pc);
  std::map<std::string, const prep::ProcessedSample*> by_id;
  for (const auto& s : data.samples) by_id[s.id] = &s;
  const auto ptrs = [&](prep::Split split) {
    std::vector<const prep::ProcessedSample*> out;
    for (const auto& id : data.manifest.split.of(split)) out.push_back(by_id.at(id));
    return out;
  };
  std::vector<ev::RunResult> runs;
  for (std::uint64_t run = 0; run < 3; ++run) {
    const prep::TrainingSet train(ptrs(prep::Split::kTrain), gl::derive_seed(run, "augment"));
    const prep::SampleSet val(ptrs(prep::Split::kValidation)), test(ptrs(prep::Split::kTest));
    auto state = nn::build_network(nn::mammo_cnn_spec(), gl::derive_seed(run, "init"));
    nn::TrainConfig tc;
    tc.seed = gl::derive_seed(run, "train");
    nn::fit(state, train, val, tc);
    const auto r = nn::evaluate(state, test);
    std::vector<int> truths;
    for (std::size_t i = 0; i < test.size(); ++i) truths.push_back(test.label(i));
    runs.push_back({ev::confusion_matrix(truths, r.predictions), {}});
  }
  const auto avg = ev::average_over_runs(runs).mean;
  const bool ok = avg.accuracy > 0.65 && std::abs(avg.macro_f1 - 0.65) <= 0.15;
  return verdict(ok, "3-run mean accuracy " + fmt("%.4f", avg.accuracy) + " (need > 0.65), macro F1 " +
                         fmt("%.4f", avg.macro_f1) + " (need 0.65 +/- 0.15)");
}

Outcome lime_fidelity() {
  const int f = 100;
  int matched = 0, total = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    gl::Rng rng(seed * 131);
    std::vector<double> w(f);
    for (double& v : w) v = rng.normal() * 0.01;
    std::vector<int> strong;
    for (int k = 0; k < 10; ++k) {
      const int i = static_cast<int>(k * 10 + (seed * 3) % 10);
      w[i] = (k % 2 ? 1.0 : -1.0) * (0.4 + 0.07 * k);
      strong.push_back(i);
    }
    ex::LimeOptions opt;
    opt.seed = seed;
    const auto fit = ex::lime_fit(gl::testing::additive(w, 0.3), f, 0, opt);
    for (int i : strong) {
      ++total;
      matched += fit.per_segment[i] != 0.0 && std::signbit(fit.per_segment[i]) == std::signbit(w[i]);
    }
  }
  return verdict(matched == total, std::to_string(matched) + " of " + std::to_string(total) +
                                       " ground-truth top-10 segments selected with the right sign over 5 seeds");
}

Outcome augmentation_count() {
  prep::SyntheticConfig sc;
  sc.per_class = 150;
  const auto samples = prep::synthetic_dataset(sc);
  const auto set = prep::augment_dataset(samples, 1);
  bool ok = set.items.size() == samples.size() * 16;
  std::string detail = "synthetic: " + std::to_string(samples.size()) + " sources -> " +
                       std::to_string(set.items.size()) + " images (expected " +
                       std::to_string(samples.size() * 16) + ")";
  if (const char* dir = mias_dir()) {
    prep::PreprocessConfig pc;
    pc.mias_dir = dir;
    const auto data = prep::preprocess_mias(pc);
    const std::size_t sources = data.manifest.split.of(prep::Split::kTrain).size();
    const std::size_t count = data.manifest.train_augmented;
    ok = ok && sources == 221 && count == 3534;
    detail += "; MIAS: " + std::to_string(sources) + " sources -> " + std::to_string(count) + " images (" +
              std::to_string(data.manifest.train_duplicates) + " duplicates; expected 221 -> 3534)";
  } else {
    detail += "; MIAS part skipped (GRADLENS_MIAS_DIR not set)";
  }
  return verdict(ok, detail);
}

Outcome iou_geometry() {
  const int side = 224;
  const auto rect_mask = [&](int x0, int y0, int w, int h) {
    std::vector<std::uint8_t> m(side * side, 0);
    for (int y = y0; y < y0 + h; ++y)
      for (int x = x0; x < x0 + w; ++x) m[y * side + x] = 1;
    return m;
  };
  const auto as_heatmap = [&](const std::vector<std::uint8_t>& m) {
    ex::Heatmap h(side, side);
    for (std::size_t i = 0; i < m.size(); ++i) h.values[i] = m[i];
    return h;
  };
  const auto a = rect_mask(20, 20, 60, 40);
  const auto same = ev::heatmap_iou(as_heatmap(a), a);
  const auto disjoint = ev::heatmap_iou(as_heatmap(rect_mask(120, 120, 60, 40)), a);
  const auto half = ev::heatmap_iou(as_heatmap(rect_mask(50, 20, 60, 40)), a);
  const bool ok = same && *same == 1.0 && disjoint && *disjoint == 0.0 && half && *half == 1.0 / 3.0;
  return verdict(ok, "identical " + fmt("%.17g", same.value_or(-1)) + ", disjoint " +
                         fmt("%.17g", disjoint.value_or(-1)) + ", half overlap " + fmt("%.17g", half.value_or(-1)));
}

struct Criterion {
  const char* name;
  double limit_seconds;
  Outcome (*run)();
};

const std::map<int, Criterion>& criteria() {
  static const std::map<int, Criterion> table = {
      {1, {"Shapley oracle equivalence", 30, shapley_oracle}},
      {2, {"hand Shapley case", 1, hand_shapley}},
      {3, {"gradient correctness", 60, gradient_check}},
      {4, {"Grad-CAM determinism", 5, gradcam_determinism}},
      {5, {"runtime ordering", 900, runtime_ordering}},
      {6, {"majority-baseline metrics", 1, majority_baseline}},
      {7, {"architecture conformance", 1, architecture}},
      {8, {"synthetic training sanity", 900, synthetic_training}},
      {9, {"MIAS soft check", 7200, mias_soft_check}},
      {10, {"LIME fidelity", 60, lime_fidelity}},
      {11, {"augmentation count identity", 60, augmentation_count}},
      {12, {"IoU geometry", 1, iou_geometry}},
  };
  return table;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) {
    const int n = std::atoi(argv[i]);
    if (!criteria().count(n)) {
      std::fprintf(stderr, "unknown criterion '%s' (1-12)\n", argv[i]);
      return 2;
    }
    selected.push_back(n);
  }
  if (selected.empty())
    for (const auto& [n, c] : criteria()) selected.push_back(n);

  int failed = 0, skipped = 0;
  for (int n : selected) {
    const auto& c = criteria().at(n);
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {Status::kFail, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (o.status == Status::kPass && secs > c.limit_seconds) {
      o.status = Status::kFail;
      o.detail += "; exceeded the " + fmt("%.0f", c.limit_seconds) + " s limit";
    }
    const char* tag = o.status == Status::kPass ? "PASS" : o.status == Status::kFail ? "FAIL" : "SKIP";
    std::printf("criterion %2d %s: %s: %s [%.2f s]\n", n, tag, c.name, o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += o.status == Status::kFail;
    skipped += o.status == Status::kSkip;
  }
  if (failed) return 1;
  return skipped == static_cast<int>(selected.size()) ? 77 : 0;
}
