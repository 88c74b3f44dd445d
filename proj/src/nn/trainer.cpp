#include "gradlens/nn/trainer.hpp"

#include <numeric>
#include <stdexcept>
#include <string>

namespace gradlens::nn {

bool EarlyStopping::update(int epoch, double val_loss) {
  if (best_epoch_ == 0 || val_loss < best_loss_) {
    best_loss_ = val_loss;
    best_epoch_ = epoch;
    wait_ = 0;
    return true;
  }
  ++wait_;
  return false;
}

EvalResult evaluate(const NetworkState& state, std::span<const Example> examples) {
  return evaluate(state, ExampleSpan(examples));
}

EvalResult evaluate(const NetworkState& state, const ExampleSource& examples) {
  EvalResult r;
  if (examples.empty()) return r;
  static constexpr ClassWeights kUnit = {1.0, 1.0, 1.0};
  double loss = 0.0;
  int correct = 0;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const int label = examples.label(i);
    const auto trace = forward(state, examples.image(i), Mode::kInference);
    const auto& probs = trace.probabilities();
    loss += weighted_cross_entropy(probs, label, kUnit).loss;
    const int pred = argmax(probs.values());
    correct += pred == label;
    r.predictions.push_back(pred);
    r.probabilities.emplace_back(probs.values().begin(), probs.values().end());
  }
  r.loss = loss / static_cast<double>(examples.size());
  r.accuracy = static_cast<double>(correct) / static_cast<double>(examples.size());
  return r;
}

History fit(NetworkState& state, std::span<const Example> train, std::span<const Example> validation,
            const TrainConfig& config, const EpochCallback& on_epoch) {
  return fit(state, ExampleSpan(train), ExampleSpan(validation), config, on_epoch);
}

History fit(NetworkState& state, const ExampleSource& train, const ExampleSource& validation,
            const TrainConfig& config, const EpochCallback& on_epoch) {
  if (train.empty()) throw std::invalid_argument("fit: empty training set");
  if (validation.empty()) throw std::invalid_argument("fit: empty validation set");
  if (config.batch_size <= 0 || config.max_epochs <= 0 || config.patience < 0 ||
      !(config.learning_rate > 0.0)) {
    throw std::invalid_argument("fit: batch size, epochs and learning rate must be positive");
  }
  for (double w : config.class_weights) {
    if (!(w > 0.0)) throw std::invalid_argument("fit: class weights must be positive");
  }
  const std::size_t classes = layer_output_shapes(state.spec).back().count();
  for (const ExampleSource* set : {&train, &validation}) {
    for (std::size_t i = 0; i < set->size(); ++i) {
      const int label = set->label(i);
      if (label < 0 || static_cast<std::size_t>(label) >= classes) {
        throw std::invalid_argument("fit: label " + std::to_string(label) + " out of range");
      }
    }
  }

  OptimizerState opt;
  opt.config.learning_rate = config.learning_rate;
  Rng shuffle_rng(derive_seed(config.seed, "shuffle"));
  Rng dropout_rng(derive_seed(config.seed, "dropout"));
  EarlyStopping stopper(config.patience);
  History history;
  std::vector<LayerParams> best = state.params;

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto grads = zero_gradients(state.spec);
  auto param_ptrs = parameter_tensors(state.params);
  auto grad_ptrs = parameter_tensors(std::as_const(grads));

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    state.training = true;
    shuffle_rng.shuffle(std::span(order));
    double loss_sum = 0.0;
    int correct = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      const float inv_batch = 1.0f / static_cast<float>(end - start);
      for (auto* g : parameter_tensors(grads)) g->fill(0.0f);
      for (std::size_t b = start; b < end; ++b) {
        const int label = train.label(order[b]);
        const auto trace = forward(state, train.image(order[b]), Mode::kTraining, &dropout_rng);
        auto lr = weighted_cross_entropy(trace.probabilities(), label, config.class_weights);
        loss_sum += lr.loss;
        correct += argmax(trace.probabilities().values()) == label;
        for (auto& v : lr.grad_logits.values()) v *= inv_batch;
        backprop(state, trace, lr.grad_logits, {}, &grads);
      }
      adam_step(opt, param_ptrs, grad_ptrs);
    }
    state.training = false;

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(train.size());
    rec.train_accuracy = static_cast<double>(correct) / static_cast<double>(train.size());
    const auto val = evaluate(state, validation);
    rec.val_loss = val.loss;
    rec.val_accuracy = val.accuracy;
    history.epochs.push_back(rec);
    if (on_epoch) on_epoch(rec);

    if (stopper.update(epoch, val.loss)) best = state.params;
    if (stopper.should_stop()) {
      history.stopped_early = true;
      break;
    }
  }
  state.params = std::move(best);
  state.training = false;
  history.best_epoch = stopper.best_epoch();
  return history;
}

}  // namespace gradlens::nn
