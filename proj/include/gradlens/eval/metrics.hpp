#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace gradlens::eval {

inline constexpr int kClasses = 3;

struct ConfusionMatrix {
  std::array<std::array<long, kClasses>, kClasses> counts{};  // [true][predicted]

  long total() const;
  long trace() const;
  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

ConfusionMatrix confusion_matrix(std::span<const int> truths, std::span<const int> predictions);

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::optional<double> auc;
};

struct MetricsReport {
  std::array<ClassMetrics, kClasses> per_class;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
  double accuracy = 0.0;
  double balanced_accuracy = 0.0;
  int runs = 1;
};

// 0/0 precision, recall and F1 count as 0.
MetricsReport metrics(const ConfusionMatrix& cm);

struct RocCurve {
  std::vector<std::pair<double, double>> points;  // (fpr, tpr), from (0, 0) to (1, 1)
  double auc = 0.0;
};

// One-vs-rest curve; nullopt when the truth vector lacks positives or negatives.
std::optional<RocCurve> roc_curve(std::span<const double> scores, std::span<const std::uint8_t> positive);

// probabilities[i][c] per sample; one curve per class.
std::array<std::optional<RocCurve>, kClasses> roc_auc(const std::vector<std::vector<double>>& probabilities,
                                                      std::span<const int> truths);

struct RunResult {
  ConfusionMatrix matrix;
  std::array<std::optional<double>, kClasses> auc{};
};

struct AveragedEvaluation {
  std::array<std::array<double, kClasses>, kClasses> mean_matrix{};
  MetricsReport mean;  // per-run metrics averaged; AUC over runs where defined
};

AveragedEvaluation average_over_runs(const std::vector<RunResult>& runs);

// Predicts the most frequent truth label everywhere; ties go to the lowest class.
std::vector<int> majority_predictions(std::span<const int> truths);

std::string format_metrics(const MetricsReport& report);
std::string format_matrix(const ConfusionMatrix& cm);
std::string format_matrix(const std::array<std::array<double, kClasses>, kClasses>& m);
// "fpr,tpr" header then one point per line.
std::string format_roc_csv(const RocCurve& curve);

}  // namespace gradlens::eval
