#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "gradlens/nn/adam.hpp"
#include "gradlens/nn/loss.hpp"
#include "gradlens/nn/network.hpp"

namespace gradlens::nn {

struct Example {
  Tensor image;
  int label = 0;
};

// Random-access example collection; images may be produced on demand.
class ExampleSource {
 public:
  virtual ~ExampleSource() = default;
  virtual std::size_t size() const = 0;
  virtual int label(std::size_t i) const = 0;
  virtual Tensor image(std::size_t i) const = 0;
  bool empty() const { return size() == 0; }
};

class ExampleSpan : public ExampleSource {
 public:
  explicit ExampleSpan(std::span<const Example> examples) : examples_(examples) {}
  std::size_t size() const override { return examples_.size(); }
  int label(std::size_t i) const override { return examples_[i].label; }
  Tensor image(std::size_t i) const override { return examples_[i].image; }

 private:
  std::span<const Example> examples_;
};

struct TrainConfig {
  double learning_rate = 1e-4;
  int batch_size = 16;
  int max_epochs = 50;
  int patience = 10;
  ClassWeights class_weights = {1.0, 2.0, 3.0};
  std::uint64_t seed = 0;
};

struct EpochRecord {
  int epoch = 0;  // 1-based
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  double val_loss = 0.0;
  double val_accuracy = 0.0;
};

struct History {
  std::vector<EpochRecord> epochs;
  int best_epoch = 0;     // epoch whose weights were restored
  bool stopped_early = false;

  int epochs_run() const { return static_cast<int>(epochs.size()); }
};

// Tracks the best validation loss. Training stops once `patience` epochs in
// a row (at least one) have failed to improve on it.
class EarlyStopping {
 public:
  explicit EarlyStopping(int patience) : patience_(patience) {}

  // Returns true when `val_loss` is a new best.
  bool update(int epoch, double val_loss);
  bool should_stop() const { return wait_ > 0 && wait_ >= patience_; }
  int best_epoch() const { return best_epoch_; }
  double best_loss() const { return best_loss_; }

 private:
  int patience_;
  int wait_ = 0;
  int best_epoch_ = 0;
  double best_loss_ = 0.0;
};

struct EvalResult {
  double loss = 0.0;  // unweighted mean cross-entropy
  double accuracy = 0.0;
  std::vector<int> predictions;
  std::vector<std::vector<float>> probabilities;
};

EvalResult evaluate(const NetworkState& state, const ExampleSource& examples);
EvalResult evaluate(const NetworkState& state, std::span<const Example> examples);

using EpochCallback = std::function<void(const EpochRecord&)>;

// Minibatch Adam on the class-weighted cross-entropy, reshuffling every epoch
// from config.seed. On return `state` holds the best-validation-loss weights
// and is in inference mode.
History fit(NetworkState& state, const ExampleSource& train, const ExampleSource& validation,
            const TrainConfig& config, const EpochCallback& on_epoch = {});
History fit(NetworkState& state, std::span<const Example> train, std::span<const Example> validation,
            const TrainConfig& config, const EpochCallback& on_epoch = {});

}  // namespace gradlens::nn
