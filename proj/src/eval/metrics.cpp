#include "gradlens/eval/metrics.hpp"

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <stdexcept>

#include "gradlens/text.hpp"

namespace gradlens::eval {

namespace {

double ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }

void check_label(int label, const char* what) {
  if (label < 0 || label >= kClasses) {
    throw std::invalid_argument(std::string(what) + " label " + std::to_string(label) + " is outside 0.." +
                                std::to_string(kClasses - 1));
  }
}

}  // namespace

long ConfusionMatrix::total() const {
  long n = 0;
  for (const auto& row : counts) n += std::accumulate(row.begin(), row.end(), 0L);
  return n;
}

long ConfusionMatrix::trace() const {
  long n = 0;
  for (int c = 0; c < kClasses; ++c) n += counts[c][c];
  return n;
}

ConfusionMatrix confusion_matrix(std::span<const int> truths, std::span<const int> predictions) {
  if (truths.size() != predictions.size()) {
    throw std::invalid_argument(std::to_string(truths.size()) + " truths but " + std::to_string(predictions.size()) +
                                " predictions");
  }
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < truths.size(); ++i) {
    check_label(truths[i], "true");
    check_label(predictions[i], "predicted");
    ++cm.counts[truths[i]][predictions[i]];
  }
  return cm;
}

MetricsReport metrics(const ConfusionMatrix& cm) {
  const long total = cm.total();
  if (total <= 0) throw std::invalid_argument("metrics need at least one evaluated sample");
  MetricsReport r;
  for (int c = 0; c < kClasses; ++c) {
    double predicted = 0.0, actual = 0.0;
    for (int k = 0; k < kClasses; ++k) {
      predicted += cm.counts[k][c];
      actual += cm.counts[c][k];
    }
    auto& m = r.per_class[c];
    m.precision = ratio(cm.counts[c][c], predicted);
    m.recall = ratio(cm.counts[c][c], actual);
    m.f1 = ratio(2.0 * m.precision * m.recall, m.precision + m.recall);
    r.macro_precision += m.precision / kClasses;
    r.macro_recall += m.recall / kClasses;
    r.macro_f1 += m.f1 / kClasses;
  }
  r.accuracy = static_cast<double>(cm.trace()) / static_cast<double>(total);
  r.balanced_accuracy = r.macro_recall;
  return r;
}

std::optional<RocCurve> roc_curve(std::span<const double> scores, std::span<const std::uint8_t> positive) {
  if (scores.size() != positive.size()) throw std::invalid_argument("scores and truths differ in length");
  const double pos = static_cast<double>(std::count(positive.begin(), positive.end(), std::uint8_t{1}));
  const double neg = static_cast<double>(scores.size()) - pos;
  if (pos == 0.0 || neg == 0.0) return std::nullopt;
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  RocCurve curve;
  curve.points.emplace_back(0.0, 0.0);
  double tp = 0.0, fp = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    // Equal scores cross the threshold together.
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      (positive[order[j]] ? tp : fp) += 1.0;
      ++j;
    }
    const auto [px, py] = curve.points.back();
    const double x = fp / neg, y = tp / pos;
    curve.auc += (x - px) * (y + py) / 2.0;
    curve.points.emplace_back(x, y);
    i = j;
  }
  return curve;
}

std::array<std::optional<RocCurve>, kClasses> roc_auc(const std::vector<std::vector<double>>& probabilities,
                                                      std::span<const int> truths) {
  if (probabilities.size() != truths.size()) throw std::invalid_argument("scores and truths differ in length");
  std::array<std::optional<RocCurve>, kClasses> out;
  for (int c = 0; c < kClasses; ++c) {
    std::vector<double> s(truths.size());
    std::vector<std::uint8_t> p(truths.size());
    for (std::size_t i = 0; i < truths.size(); ++i) {
      check_label(truths[i], "true");
      if (probabilities[i].size() != static_cast<std::size_t>(kClasses)) {
        throw std::invalid_argument("every sample needs one score per class");
      }
      s[i] = probabilities[i][c];
      p[i] = truths[i] == c;
    }
    out[c] = roc_curve(s, p);
  }
  return out;
}

AveragedEvaluation average_over_runs(const std::vector<RunResult>& runs) {
  if (runs.empty()) throw std::invalid_argument("averaging needs at least one run");
  AveragedEvaluation avg;
  const double n = static_cast<double>(runs.size());
  std::array<int, kClasses> auc_runs{};
  std::array<double, kClasses> auc_sum{};
  for (const auto& run : runs) {
    for (int t = 0; t < kClasses; ++t)
      for (int p = 0; p < kClasses; ++p) avg.mean_matrix[t][p] += static_cast<double>(run.matrix.counts[t][p]) / n;
    const auto m = metrics(run.matrix);
    for (int c = 0; c < kClasses; ++c) {
      avg.mean.per_class[c].precision += m.per_class[c].precision / n;
      avg.mean.per_class[c].recall += m.per_class[c].recall / n;
      avg.mean.per_class[c].f1 += m.per_class[c].f1 / n;
      if (run.auc[c]) {
        auc_sum[c] += *run.auc[c];
        ++auc_runs[c];
      }
    }
    avg.mean.macro_precision += m.macro_precision / n;
    avg.mean.macro_recall += m.macro_recall / n;
    avg.mean.macro_f1 += m.macro_f1 / n;
    avg.mean.accuracy += m.accuracy / n;
    avg.mean.balanced_accuracy += m.balanced_accuracy / n;
  }
  for (int c = 0; c < kClasses; ++c) {
    if (auc_runs[c] > 0) avg.mean.per_class[c].auc = auc_sum[c] / auc_runs[c];
  }
  avg.mean.runs = static_cast<int>(runs.size());
  return avg;
}

std::vector<int> majority_predictions(std::span<const int> truths) {
  std::array<long, kClasses> freq{};
  for (int t : truths) {
    check_label(t, "true");
    ++freq[t];
  }
  const int majority = static_cast<int>(std::max_element(freq.begin(), freq.end()) - freq.begin());
  return std::vector<int>(truths.size(), majority);
}

std::string format_metrics(const MetricsReport& r) {
  static const char* kNames[kClasses] = {"normal", "benign", "malignant"};
  std::string out;
  const auto line = [&](const std::string& key, double v) { out += key + ": " + format_double(v) + "\n"; };
  out += "runs: " + std::to_string(r.runs) + "\n";
  line("accuracy", r.accuracy);
  line("balanced_accuracy", r.balanced_accuracy);
  line("macro_precision", r.macro_precision);
  line("macro_recall", r.macro_recall);
  line("macro_f1", r.macro_f1);
  for (int c = 0; c < kClasses; ++c) {
    const std::string p = std::string(kNames[c]) + ".";
    line(p + "precision", r.per_class[c].precision);
    line(p + "recall", r.per_class[c].recall);
    line(p + "f1", r.per_class[c].f1);
    out += p + "auc: " + (r.per_class[c].auc ? format_double(*r.per_class[c].auc) : std::string("n/a")) + "\n";
  }
  return out;
}

std::string format_matrix(const ConfusionMatrix& cm) {
  std::string out;
  for (const auto& row : cm.counts) {
    out += std::to_string(row[0]) + " " + std::to_string(row[1]) + " " + std::to_string(row[2]) + "\n";
  }
  return out;
}

std::string format_matrix(const std::array<std::array<double, kClasses>, kClasses>& m) {
  std::string out;
  for (const auto& row : m) out += format_double(row[0]) + " " + format_double(row[1]) + " " + format_double(row[2]) + "\n";
  return out;
}

std::string format_roc_csv(const RocCurve& curve) {
  std::string out = "fpr,tpr\n";
  for (const auto& [x, y] : curve.points) out += format_double(x) + "," + format_double(y) + "\n";
  return out;
}

}  // namespace gradlens::eval
