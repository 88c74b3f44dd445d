#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "gradlens/explain/attribution.hpp"
#include "gradlens/nn/trainer.hpp"
#include "gradlens/prep/enhance.hpp"
#include "gradlens/prep/split.hpp"
#include "gradlens/seg/slic.hpp"

namespace gradlens::cli {

// Bad flags, config keys or values; maps to exit code 4.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::filesystem::path mias_dir;
  std::filesystem::path dataset_dir;
  std::filesystem::path out_dir = ".";
  std::filesystem::path weights;
  int synthetic_per_class = 0;  // preprocess generates synthetic data when > 0
  std::set<std::string> exclusions;
  prep::SplitFractions fractions;
  prep::ClaheConfig clahe;
  nn::TrainConfig train;
  seg::SlicConfig slic;
  explain::ExplainerConfig explainer;
  std::uint64_t seed = 0;
  int jobs = 1;
  std::string image_id;
  std::vector<explain::Method> methods = {explain::Method::kGradCam, explain::Method::kKernelShap,
                                          explain::Method::kLime};
  std::optional<int> runs;
  bool majority_baseline = false;
  int bench_images = 10;
  int robustness_runs = 5;
  double iou_quantile = 0.8;
};

// Every key accepted in a config file, in documentation order.
const std::vector<std::string>& config_keys();

// Sets one field from its textual value.
void apply_setting(RunConfig& config, const std::string& key, const std::string& value);

// "key = value" lines with '#' comments, applied in order.
void apply_config_text(RunConfig& config, const std::string& text);

// "all" or a comma-separated list of gradcam, kernel_shap (shap), lime.
std::vector<explain::Method> parse_methods(const std::string& list);

}  // namespace gradlens::cli
