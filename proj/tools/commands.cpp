#include "commands.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "gradlens/eval/bench.hpp"
#include "gradlens/eval/metrics.hpp"
#include "gradlens/explain/gradcam.hpp"
#include "gradlens/explain/lime.hpp"
#include "gradlens/explain/model.hpp"
#include "gradlens/explain/shapley.hpp"
#include "gradlens/nn/weights_io.hpp"
#include "gradlens/prep/dataset.hpp"
#include "gradlens/prep/pnm.hpp"
#include "gradlens/prep/synthetic.hpp"
#include "gradlens/rng.hpp"
#include "gradlens/text.hpp"

namespace gradlens::cli {

namespace fs = std::filesystem;

namespace {

void check_fractions(const prep::SplitFractions& f) {
  if (std::abs(f.train + f.validation + f.test - 1.0) > 1e-9) {
    throw UsageError("split fractions must sum to 1");
  }
}

fs::path require_dataset_dir(const RunConfig& config) {
  if (config.dataset_dir.empty()) throw UsageError("no dataset directory given (dataset = DIR)");
  if (!fs::exists(config.dataset_dir / "manifest.txt")) {
    throw prep::DataError("no manifest.txt in " + config.dataset_dir.string());
  }
  return config.dataset_dir;
}

nn::NetworkState load_model(const RunConfig& config, const prep::Dataset& dataset) {
  if (config.weights.empty()) throw ModelError("no weights file given (weights = PATH)");
  if (!fs::exists(config.weights)) throw ModelError("weights file " + config.weights.string() + " does not exist");
  nn::NetworkState state;
  try {
    state = nn::load_weights(config.weights);
  } catch (const nn::WeightsError& e) {
    throw ModelError(config.weights.string() + ": " + e.what());
  }
  if (!dataset.samples.empty()) {
    const auto& shape = dataset.samples.begin()->second.image.shape();
    const auto& in = state.spec.input;
    if (shape != std::vector<int>{in.h, in.w, in.c}) {
      throw ModelError("network input " + std::to_string(in.h) + "x" + std::to_string(in.w) + "x" +
                       std::to_string(in.c) + " does not match the dataset images");
    }
  }
  return state;
}

std::string run_name(int run) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "run_%02d", run + 1);
  return buf;
}

struct Trained {
  nn::NetworkState state;
  nn::History history;
};

// Builds, trains and restores the best-validation network for one seed.
Trained train_model(const prep::Dataset& dataset, const RunConfig& config, std::uint64_t seed, std::ostream& log) {
  const prep::TrainingSet train(dataset.split(prep::Split::kTrain), derive_seed(seed, "augment"));
  const prep::SampleSet validation(dataset.split(prep::Split::kValidation));
  if (train.empty()) throw prep::DataError("the training split is empty");
  if (validation.empty()) throw prep::DataError("the validation split is empty");
  nn::TrainConfig tc = config.train;
  tc.seed = derive_seed(seed, "train");
  Trained t;
  t.state = nn::build_network(nn::mammo_cnn_spec(), derive_seed(seed, "init"));
  log << "training on " << train.size() << " augmented images, validating on " << validation.size() << "\n";
  t.history = nn::fit(t.state, train, validation, tc, [&](const nn::EpochRecord& r) {
    log << "epoch " << r.epoch << " train_loss " << format_double(r.train_loss) << " train_accuracy "
        << format_double(r.train_accuracy) << " val_loss " << format_double(r.val_loss) << " val_accuracy "
        << format_double(r.val_accuracy) << "\n"
        << std::flush;
  });
  return t;
}

std::string history_csv(const nn::History& h) {
  std::string out = "epoch,train_loss,train_accuracy,val_loss,val_accuracy\n";
  for (const auto& r : h.epochs) {
    out += std::to_string(r.epoch) + "," + format_double(r.train_loss) + "," + format_double(r.train_accuracy) + "," +
           format_double(r.val_loss) + "," + format_double(r.val_accuracy) + "\n";
  }
  return out;
}

eval::RunResult evaluate_run(const nn::NetworkState& state, const prep::Dataset& dataset, const fs::path& out,
                             const std::string& name) {
  const prep::SampleSet test(dataset.split(prep::Split::kTest));
  if (test.empty()) throw prep::DataError("the test split is empty");
  const nn::EvalResult r = nn::evaluate(state, test);
  std::vector<int> truths(test.size());
  std::vector<std::vector<double>> probs(test.size());
  for (std::size_t i = 0; i < test.size(); ++i) {
    truths[i] = test.label(i);
    probs[i].assign(r.probabilities[i].begin(), r.probabilities[i].end());
  }
  eval::RunResult run;
  run.matrix = eval::confusion_matrix(truths, r.predictions);
  auto report = eval::metrics(run.matrix);
  const auto curves = eval::roc_auc(probs, truths);
  for (int c = 0; c < eval::kClasses; ++c) {
    if (!curves[c]) continue;
    run.auc[c] = curves[c]->auc;
    report.per_class[c].auc = curves[c]->auc;
    write_text_file((out / (name + "_roc_" + prep::label_name(c) + ".csv")).string(), eval::format_roc_csv(*curves[c]));
  }
  write_text_file((out / (name + "_metrics.txt")).string(), eval::format_metrics(report));
  write_text_file((out / (name + "_matrix.txt")).string(), eval::format_matrix(run.matrix));
  return run;
}

void write_explanation(const fs::path& out, const std::string& stem, const Tensor& image,
                       const explain::Attribution& attr, eval::Palette palette) {
  const auto gray = explain::heatmap_to_gray(attr.heatmap);
  write_text_file((out / (stem + ".txt")).string(), explain::format_attribution(attr, gray));
  prep::save_pgm(gray.image, out / (stem + "_heatmap.pgm"));
  prep::save_ppm(eval::render_overlay(image, attr.heatmap, palette), out / (stem + "_overlay.ppm"));
}

}  // namespace

void cmd_preprocess(const RunConfig& config, std::ostream& log) {
  check_fractions(config.fractions);
  prep::PreprocessResult r;
  if (config.synthetic_per_class > 0) {
    prep::SyntheticConfig sc;
    sc.per_class = config.synthetic_per_class;
    sc.seed = derive_seed(config.seed, "synthetic");
    r.samples = prep::synthetic_dataset(sc);
    r.manifest = prep::plan_dataset("synthetic", r.samples, config.fractions, config.seed);
    r.manifest.listed = static_cast<int>(r.samples.size());
  } else {
    if (config.mias_dir.empty()) throw UsageError("no MIAS directory given (mias_dir = DIR or --synthetic N)");
    prep::PreprocessConfig pc;
    pc.mias_dir = config.mias_dir;
    pc.exclusions = config.exclusions;
    pc.fractions = config.fractions;
    pc.clahe = config.clahe;
    pc.seed = config.seed;
    pc.jobs = config.jobs;
    r = prep::preprocess_mias(pc);
  }
  prep::write_dataset(config.out_dir, r.manifest, r.samples);
  const auto counts = r.manifest.class_counts();
  log << "usable images: " << r.samples.size() << "\n";
  for (int c = 0; c < 3; ++c) log << prep::label_name(c) << ": " << counts[c] << "\n";
  const char* split_names[3] = {"train", "validation", "test"};
  for (int s = 0; s < 3; ++s) {
    const auto& cc = r.manifest.split.class_counts[s];
    log << split_names[s] << ": " << r.manifest.split.ids[s].size() << " (" << cc[0] << ", " << cc[1] << ", " << cc[2]
        << ")\n";
  }
  log << "augmented training images: " << r.manifest.train_augmented << " (" << r.manifest.train_duplicates
      << " duplicates removed, " << r.manifest.train_balanced_per_class << " per class after balancing)\n";
  log << "dataset written to " << config.out_dir.string() << "\n";
}

void cmd_train(const RunConfig& config, std::ostream& log) {
  const auto dir = require_dataset_dir(config);
  prep::Dataset dataset;
  try {
    dataset = prep::load_dataset(dir);
  } catch (const prep::DataError& e) {
    throw ModelError(std::string("dataset does not match its manifest: ") + e.what());
  }
  fs::create_directories(config.out_dir);
  const Trained t = train_model(dataset, config, config.seed, log);
  nn::save_weights(t.state, config.out_dir / "weights.bin");
  write_text_file((config.out_dir / "history.csv").string(), history_csv(t.history));
  std::string report;
  report += "seed: " + std::to_string(config.seed) + "\n";
  report += "epochs_run: " + std::to_string(t.history.epochs_run()) + "\n";
  report += "best_epoch: " + std::to_string(t.history.best_epoch) + "\n";
  report += std::string("stopped_early: ") + (t.history.stopped_early ? "true" : "false") + "\n";
  write_text_file((config.out_dir / "train_report.txt").string(), report);
  log << "stopped after epoch " << t.history.epochs_run() << "; restored weights of epoch " << t.history.best_epoch
      << "\n";
}

void cmd_evaluate(const RunConfig& config, std::ostream& log) {
  const prep::Dataset dataset = prep::load_dataset(require_dataset_dir(config));
  fs::create_directories(config.out_dir);
  std::vector<eval::RunResult> runs;
  if (config.majority_baseline) {
    std::vector<int> train_labels, truths;
    for (const auto* s : dataset.split(prep::Split::kTrain)) train_labels.push_back(s->label);
    for (const auto* s : dataset.split(prep::Split::kTest)) truths.push_back(s->label);
    if (train_labels.empty() || truths.empty()) throw prep::DataError("the baseline needs train and test samples");
    const int majority = eval::majority_predictions(train_labels).front();
    eval::RunResult run;
    run.matrix = eval::confusion_matrix(truths, std::vector<int>(truths.size(), majority));
    write_text_file((config.out_dir / "run_01_metrics.txt").string(), eval::format_metrics(eval::metrics(run.matrix)));
    write_text_file((config.out_dir / "run_01_matrix.txt").string(), eval::format_matrix(run.matrix));
    runs.push_back(run);
    log << "majority baseline predicts " << prep::label_name(majority) << "\n";
  } else {
    const int n = config.runs.value_or(config.weights.empty() ? 10 : 1);
    if (n == 1) {
      runs.push_back(evaluate_run(load_model(config, dataset), dataset, config.out_dir, run_name(0)));
    } else {
      for (int r = 0; r < n; ++r) {
        log << "run " << r + 1 << " of " << n << "\n";
        const Trained t = train_model(dataset, config, config.seed + static_cast<std::uint64_t>(r), log);
        runs.push_back(evaluate_run(t.state, dataset, config.out_dir, run_name(r)));
      }
    }
  }
  const auto avg = eval::average_over_runs(runs);
  const std::string text = eval::format_metrics(avg.mean);
  write_text_file((config.out_dir / "average_metrics.txt").string(), text);
  write_text_file((config.out_dir / "average_matrix.txt").string(), eval::format_matrix(avg.mean_matrix));
  log << text << "averaged confusion matrix (rows true, columns predicted):\n" << eval::format_matrix(avg.mean_matrix);
}

void cmd_explain(const RunConfig& config, std::ostream& log) {
  if (config.image_id.empty()) throw UsageError("no image id given (--image ID)");
  const prep::Dataset dataset = prep::load_dataset(require_dataset_dir(config));
  const auto it = dataset.samples.find(config.image_id);
  if (it == dataset.samples.end()) throw prep::DataError("image '" + config.image_id + "' is not in the dataset");
  const auto state = load_model(config, dataset);
  const Tensor& image = it->second.image;
  fs::create_directories(config.out_dir);

  const auto prediction = nn::predict(state, image);
  log << config.image_id << ": true " << prep::label_name(it->second.label) << ", predicted "
      << prep::label_name(prediction.label) << "\n";
  explain::ExplainerConfig ec = config.explainer;
  ec.seed = derive_seed(config.seed, "explain");
  ec.jobs = config.jobs;
  seg::SlicConfig sc = config.slic;
  sc.jobs = config.jobs;
  std::optional<seg::SegmentationMap> segmentation;
  const auto segments = [&]() -> const seg::SegmentationMap& {
    if (!segmentation) segmentation = seg::slic_segment(image, sc);
    return *segmentation;
  };
  const auto model = explain::probability_model(state);
  for (const auto method : config.methods) {
    const std::string stem = config.image_id + "_" + explain::method_name(method);
    if (method == explain::Method::kGradCam) {
      write_explanation(config.out_dir, stem, image, explain::grad_cam(state, image, prediction.label),
                        eval::Palette::kBlueRed);
    } else if (method == explain::Method::kKernelShap) {
      auto per_class = explain::kernel_shap(model, image, segments(), ec);
      for (auto& attr : per_class) {
        attr.heatmap = explain::attribution_to_heatmap(attr.per_segment, segments());
        write_explanation(config.out_dir, stem + "_" + prep::label_name(attr.target_class), image, attr,
                          eval::Palette::kSigned);
      }
    } else if (method == explain::Method::kLime) {
      auto attr = explain::lime_explain(model, image, segments(), prediction.label, ec);
      attr.heatmap = explain::attribution_to_heatmap(attr.per_segment, segments());
      write_explanation(config.out_dir, stem, image, attr, eval::Palette::kSigned);
    }
    log << explain::method_name(method) << " written\n";
  }
}

void cmd_bench(const RunConfig& config, std::ostream& log) {
  const prep::Dataset dataset = prep::load_dataset(require_dataset_dir(config));
  const auto state = load_model(config, dataset);
  auto pool = dataset.split(prep::Split::kTest);
  if (pool.empty()) {
    for (const auto& [id, s] : dataset.samples) pool.push_back(&s);
  }
  std::vector<eval::BenchImage> images;
  for (const auto* s : pool) {
    if (static_cast<int>(images.size()) == config.bench_images) break;
    images.push_back({s->id, s->label, s->image, s->lesion_mask});
  }
  eval::BenchConfig bc;
  bc.explainer = config.explainer;
  bc.explainer.seed = derive_seed(config.seed, "explain");
  // Timing runs on a single worker.
  bc.explainer.jobs = 1;
  bc.slic = config.slic;
  bc.slic.jobs = 1;
  bc.methods = config.methods;
  bc.robustness_runs = config.robustness_runs;
  bc.iou_quantile = config.iou_quantile;
  bc.robustness = config.robustness_runs >= 2;
  const auto report = eval::run_bench(state, images, bc);
  const std::string text = eval::format_bench_report(report);
  fs::create_directories(config.out_dir);
  write_text_file((config.out_dir / "bench_report.txt").string(), text);
  log << text;
}

int run_command(const std::string& name, const RunConfig& config, std::ostream& log, std::ostream& err) {
  try {
    if (name == "preprocess") {
      cmd_preprocess(config, log);
    } else if (name == "train") {
      cmd_train(config, log);
    } else if (name == "evaluate") {
      cmd_evaluate(config, log);
    } else if (name == "explain") {
      cmd_explain(config, log);
    } else if (name == "bench") {
      cmd_bench(config, log);
    } else {
      throw UsageError("unknown command '" + name + "'");
    }
    return kExitOk;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ModelError& e) {
    err << "model error: " << e.what() << "\n";
    return kExitModel;
  } catch (const nn::WeightsError& e) {
    err << "model error: " << e.what() << "\n";
    return kExitModel;
  } catch (const prep::DataError& e) {
    err << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const prep::PnmError& e) {
    err << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const fs::filesystem_error& e) {
    err << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::invalid_argument& e) {
    err << "invalid configuration: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace gradlens::cli
