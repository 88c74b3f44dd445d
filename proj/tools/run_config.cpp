#include "run_config.hpp"

#include <algorithm>
#include <charconv>
#include <functional>

#include "gradlens/text.hpp"

namespace gradlens::cli {

namespace {

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const char* end = value.data() + value.size();
  const auto [p, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || p != end || value.empty()) {
    throw UsageError("invalid value '" + value + "' for " + key);
  }
  return out;
}

int positive_int(const std::string& key, const std::string& value) {
  const int v = parse_number<int>(key, value);
  if (v < 1) throw UsageError(key + " must be at least 1");
  return v;
}

double non_negative(const std::string& key, const std::string& value) {
  const double v = parse_number<double>(key, value);
  if (!(v >= 0.0)) throw UsageError(key + " must be non-negative");
  return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw UsageError("invalid value '" + value + "' for " + key + " (expected true or false)");
}

seg::BaselineMode parse_baseline(const std::string& value) {
  if (value == "image_mean") return seg::BaselineMode::kImageMean;
  if (value == "zero") return seg::BaselineMode::kZero;
  if (value == "segment_mean") return seg::BaselineMode::kSegmentMean;
  throw UsageError("unknown baseline '" + value + "' (valid: image_mean, zero, segment_mean)");
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

const std::vector<std::pair<std::string, Setter>>& setters() {
  static const std::vector<std::pair<std::string, Setter>> table = {
      {"mias_dir", [](RunConfig& c, const auto&, const auto& v) { c.mias_dir = v; }},
      {"dataset", [](RunConfig& c, const auto&, const auto& v) { c.dataset_dir = v; }},
      {"out", [](RunConfig& c, const auto&, const auto& v) { c.out_dir = v; }},
      {"weights", [](RunConfig& c, const auto&, const auto& v) { c.weights = v; }},
      {"synthetic", [](RunConfig& c, const auto& k, const auto& v) { c.synthetic_per_class = parse_number<int>(k, v); }},
      {"exclude",
       [](RunConfig& c, const auto&, const auto& v) {
         c.exclusions.clear();
         for (const auto& id : split(v, ','))
           if (!id.empty()) c.exclusions.insert(id);
       }},
      {"train_fraction", [](RunConfig& c, const auto& k, const auto& v) { c.fractions.train = non_negative(k, v); }},
      {"validation_fraction",
       [](RunConfig& c, const auto& k, const auto& v) { c.fractions.validation = non_negative(k, v); }},
      {"test_fraction", [](RunConfig& c, const auto& k, const auto& v) { c.fractions.test = non_negative(k, v); }},
      {"clahe_tiles",
       [](RunConfig& c, const auto& k, const auto& v) { c.clahe.tiles_x = c.clahe.tiles_y = positive_int(k, v); }},
      {"clahe_clip", [](RunConfig& c, const auto& k, const auto& v) { c.clahe.clip_limit = non_negative(k, v); }},
      {"learning_rate", [](RunConfig& c, const auto& k, const auto& v) { c.train.learning_rate = non_negative(k, v); }},
      {"batch_size", [](RunConfig& c, const auto& k, const auto& v) { c.train.batch_size = positive_int(k, v); }},
      {"epochs", [](RunConfig& c, const auto& k, const auto& v) { c.train.max_epochs = positive_int(k, v); }},
      {"patience", [](RunConfig& c, const auto& k, const auto& v) { c.train.patience = parse_number<int>(k, v); }},
      {"class_weights",
       [](RunConfig& c, const auto& k, const auto& v) {
         const auto parts = split(v, ',');
         if (parts.size() != 3) throw UsageError(k + " needs three comma-separated values");
         for (int i = 0; i < 3; ++i) c.train.class_weights[i] = non_negative(k, parts[i]);
       }},
      {"slic_segments", [](RunConfig& c, const auto& k, const auto& v) { c.slic.target_segments = positive_int(k, v); }},
      {"slic_compactness", [](RunConfig& c, const auto& k, const auto& v) { c.slic.compactness = non_negative(k, v); }},
      {"slic_max_iterations",
       [](RunConfig& c, const auto& k, const auto& v) { c.slic.max_iterations = positive_int(k, v); }},
      {"slic_epsilon", [](RunConfig& c, const auto& k, const auto& v) { c.slic.epsilon = non_negative(k, v); }},
      {"shap_samples", [](RunConfig& c, const auto& k, const auto& v) { c.explainer.shap_samples = positive_int(k, v); }},
      {"lime_samples", [](RunConfig& c, const auto& k, const auto& v) { c.explainer.lime_samples = positive_int(k, v); }},
      {"lime_kernel_width",
       [](RunConfig& c, const auto& k, const auto& v) { c.explainer.lime_kernel_width = non_negative(k, v); }},
      {"lime_top_k", [](RunConfig& c, const auto& k, const auto& v) { c.explainer.lime_top_k = positive_int(k, v); }},
      {"ridge_lambda", [](RunConfig& c, const auto& k, const auto& v) { c.explainer.ridge_lambda = non_negative(k, v); }},
      {"baseline", [](RunConfig& c, const auto&, const auto& v) { c.explainer.baseline = parse_baseline(v); }},
      {"seed", [](RunConfig& c, const auto& k, const auto& v) { c.seed = parse_number<std::uint64_t>(k, v); }},
      {"jobs", [](RunConfig& c, const auto& k, const auto& v) { c.jobs = positive_int(k, v); }},
      {"image", [](RunConfig& c, const auto&, const auto& v) { c.image_id = v; }},
      {"methods", [](RunConfig& c, const auto&, const auto& v) { c.methods = parse_methods(v); }},
      {"runs", [](RunConfig& c, const auto& k, const auto& v) { c.runs = positive_int(k, v); }},
      {"majority_baseline", [](RunConfig& c, const auto& k, const auto& v) { c.majority_baseline = parse_bool(k, v); }},
      {"bench_images", [](RunConfig& c, const auto& k, const auto& v) { c.bench_images = positive_int(k, v); }},
      {"robustness_runs", [](RunConfig& c, const auto& k, const auto& v) { c.robustness_runs = positive_int(k, v); }},
      {"iou_quantile",
       [](RunConfig& c, const auto& k, const auto& v) {
         c.iou_quantile = non_negative(k, v);
         if (c.iou_quantile > 1.0) throw UsageError(k + " must lie in [0, 1]");
       }},
  };
  return table;
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& [name, _] : setters()) k.push_back(name);
    return k;
  }();
  return keys;
}

void apply_setting(RunConfig& config, const std::string& key, const std::string& value) {
  for (const auto& [name, set] : setters()) {
    if (name == key) {
      set(config, key, value);
      return;
    }
  }
  throw UsageError("unknown config key '" + key + "'");
}

void apply_config_text(RunConfig& config, const std::string& text) {
  KeyValues kv;
  try {
    kv = parse_key_values(text, '=');
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("config ") + e.what());
  }
  for (auto& [key, value] : kv) {
    // Trailing "# ..." after whitespace is a comment.
    for (std::size_t i = 0; i < value.size(); ++i) {
      if (value[i] == '#' && (i == 0 || value[i - 1] == ' ' || value[i - 1] == '\t')) {
        value = std::string(trim(value.substr(0, i)));
        break;
      }
    }
    apply_setting(config, key, value);
  }
}

std::vector<explain::Method> parse_methods(const std::string& list) {
  static const char* kValid = "valid methods: gradcam, kernel_shap (alias shap), lime, all";
  std::vector<explain::Method> out;
  for (const auto& name : split(list, ',')) {
    if (name == "all") {
      for (auto m : {explain::Method::kGradCam, explain::Method::kKernelShap, explain::Method::kLime}) {
        if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
      }
      continue;
    }
    const auto m = explain::parse_method(name);
    if (!m || *m == explain::Method::kExactShapley) {
      throw UsageError("unknown method '" + name + "'; " + kValid);
    }
    if (std::find(out.begin(), out.end(), *m) == out.end()) out.push_back(*m);
  }
  if (out.empty()) throw UsageError(std::string("no methods given; ") + kValid);
  return out;
}

}  // namespace gradlens::cli
