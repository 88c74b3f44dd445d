#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "commands.hpp"
#include "gradlens/text.hpp"

namespace cli = gradlens::cli;

int main(int argc, char** argv) {
  CLI::App app{"gradlens: mammogram CNN training and Grad-CAM, Kernel SHAP and LIME explanations"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::optional<std::string> seed, jobs, out, methods, runs, synthetic, dataset, weights, image, mias;
  bool majority = false;
  std::vector<std::string> overrides;
  app.add_option("--config", config_path, "Config file of 'key = value' lines");
  app.add_option("--seed", seed, "Global seed");
  app.add_option("--jobs", jobs, "Worker threads");
  app.add_option("--out", out, "Output directory");
  app.add_option("--methods", methods, "gradcam, kernel_shap (shap), lime or all; comma-separated");
  app.add_option("--runs", runs, "Evaluation runs; more than one retrains per run");
  app.add_option("--synthetic", synthetic, "Generate N synthetic images per class instead of reading MIAS");
  app.add_option("--dataset", dataset, "Preprocessed dataset directory");
  app.add_option("--weights", weights, "Weights file");
  app.add_option("--image", image, "Image id to explain");
  app.add_option("--mias", mias, "MIAS directory holding Info.txt and the PGM files");
  app.add_flag("--majority-baseline", majority, "Evaluate the majority-class predictor");
  app.add_option("--set", overrides, "Extra 'key=value' config setting; repeatable");

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"preprocess", "Build the processed dataset and manifest"},
      {"train", "Train the CNN and save the best-validation weights"},
      {"evaluate", "Write per-run and averaged metrics, confusion matrices and ROC curves"},
      {"explain", "Explain one image with the selected methods"},
      {"bench", "Time, robustness and IoU benchmark of the explainers"},
  };
  for (const auto& [name, help] : commands) app.add_subcommand(name, help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return cli::kExitUsage;
  }

  cli::RunConfig config;
  try {
    if (!config_path.empty()) {
      std::string text;
      try {
        text = gradlens::read_text_file(config_path);
      } catch (const std::exception& e) {
        throw cli::UsageError("cannot read config " + config_path + ": " + e.what());
      }
      cli::apply_config_text(config, text);
    }
    const std::pair<const char*, std::optional<std::string>*> flags[] = {
        {"seed", &seed}, {"jobs", &jobs},       {"out", &out},         {"methods", &methods}, {"runs", &runs},
        {"synthetic", &synthetic}, {"dataset", &dataset}, {"weights", &weights}, {"image", &image},
        {"mias_dir", &mias}};
    for (const auto& [key, value] : flags) {
      if (*value) cli::apply_setting(config, key, **value);
    }
    if (majority) config.majority_baseline = true;
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw cli::UsageError("--set expects key=value, got '" + kv + "'");
      cli::apply_setting(config, std::string(gradlens::trim(kv.substr(0, eq))),
                         std::string(gradlens::trim(kv.substr(eq + 1))));
    }
  } catch (const cli::UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return cli::kExitUsage;
  }

  return cli::run_command(app.get_subcommands().front()->get_name(), config, std::cout, std::cerr);
}
