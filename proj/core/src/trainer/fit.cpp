#include "styleforge/trainer/fit.hpp"

#include <cmath>
#include <numeric>

#include "styleforge/autodiff/adam.hpp"
#include "styleforge/autodiff/ops.hpp"
#include "styleforge/featnet/model.hpp"
#include "styleforge/rng.hpp"

namespace styleforge::trainer {

void TrainConfig::validate() const {
  if (max_epochs == 0) throw InvalidArgument("max_epochs must be positive");
  if (patience >= max_epochs) throw InvalidArgument("patience must be smaller than max_epochs");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw InvalidArgument("dropout must be in [0, 1)");
  if (batch_size == 0) throw InvalidArgument("batch_size must be positive");
  if (!(learning_rate > 0.0)) throw InvalidArgument("learning_rate must be positive");
  augment_ranges.validate();
}

bool EarlyStopping::update(double validation_loss) {
  const std::size_t epoch = epochs_++;
  if (validation_loss < best_) {
    best_ = validation_loss;
    best_epoch_ = epoch;
    stale_ = 0;
    return true;
  }
  ++stale_;
  return false;
}

namespace {

enum : std::uint64_t { kShuffleTag = 1, kAugmentTag = 2, kDropoutTag = 3 };

double sample_loss(const featnet::WeightBundle& net, const Sample& s) {
  ad::Tape tape;
  const ad::Var x = tape.constant(s.image.to_tensor());
  const auto pass = featnet::build_forward(tape, net, x);
  return tape.value(ad::softmax_cross_entropy(tape, pass.outputs.back(), label_index(s.label))).item();
}

}  // namespace

double mean_loss(const featnet::WeightBundle& net, std::span<const Sample> samples) {
  if (samples.empty()) throw InvalidArgument("mean_loss: no samples");
  double sum = 0.0;
  for (const auto& s : samples) sum += sample_loss(net, s);
  return sum / static_cast<double>(samples.size());
}

FitResult fit(const featnet::WeightBundle& initial, std::span<const Sample> train,
              std::span<const Sample> validation, const TrainConfig& config) {
  config.validate();
  if (train.empty()) throw InvalidArgument("training set is empty");
  if (validation.empty()) throw InvalidArgument("validation set is empty");
  for (const auto& s : train) featnet::check_input(initial.spec, s.image);

  featnet::WeightBundle weights = initial;
  std::vector<ad::AdamState> adam;
  for (const auto& l : weights.layers) {
    const ad::AdamOptions opts{config.learning_rate, 0.9, 0.999, 1e-8};
    adam.emplace_back(l.kernel.shape(), opts);
    adam.emplace_back(l.bias.shape(), opts);
  }

  FitResult result;
  result.weights = weights;
  EarlyStopping stopper(config.patience);
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (std::size_t epoch = 0; epoch < config.max_epochs; ++epoch) {
    Rng shuffle_rng(derive_seed(config.seed, kShuffleTag, epoch));
    shuffle_rng.shuffle(order);

    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      std::vector<ad::Tensor> grads;
      for (const auto& l : weights.layers) {
        grads.emplace_back(l.kernel.shape(), 0.0);
        grads.emplace_back(l.bias.shape(), 0.0);
      }
      for (std::size_t pos = start; pos < end; ++pos) {
        const Sample& s = train[order[pos]];
        const std::uint64_t draw = epoch * order.size() + pos;
        Image input = s.image;
        if (config.augment) {
          input = augment::random_augment(input, config.augment_ranges, derive_seed(config.seed, kAugmentTag, draw));
        }
        Rng dropout_rng(derive_seed(config.seed, kDropoutTag, draw));
        ad::Tape tape;
        const ad::Var x = tape.constant(input.to_tensor());
        featnet::ForwardOptions opts;
        opts.trainable = true;
        opts.dropout_rng = &dropout_rng;
        opts.dropout_rate = config.dropout;
        const auto pass = featnet::build_forward(tape, weights, x, opts);
        const ad::Var loss = ad::softmax_cross_entropy(tape, pass.outputs.back(), label_index(s.label));
        const double value = tape.value(loss).item();
        if (!std::isfinite(value)) {
          throw TrainingDiverged(epoch, "training loss became non-finite in epoch " + std::to_string(epoch));
        }
        epoch_loss += value;
        tape.backward(loss);
        for (std::size_t p = 0; p < pass.params.size(); ++p) {
          const ad::Tensor gk = tape.grad(pass.params[p].first);
          const ad::Tensor gb = tape.grad(pass.params[p].second);
          for (std::size_t i = 0; i < gk.size(); ++i) grads[2 * p][i] += gk[i];
          for (std::size_t i = 0; i < gb.size(); ++i) grads[2 * p + 1][i] += gb[i];
        }
      }
      const double inv = 1.0 / static_cast<double>(end - start);
      for (std::size_t p = 0; p < weights.layers.size(); ++p) {
        for (auto& g : grads[2 * p].data()) g *= inv;
        for (auto& g : grads[2 * p + 1].data()) g *= inv;
        ad::adam_step(weights.layers[p].kernel, grads[2 * p], adam[2 * p]);
        ad::adam_step(weights.layers[p].bias, grads[2 * p + 1], adam[2 * p + 1]);
      }
    }
    result.train_loss.push_back(epoch_loss / static_cast<double>(train.size()));

    const double val = mean_loss(weights, validation);
    if (!std::isfinite(val)) {
      throw TrainingDiverged(epoch, "validation loss became non-finite in epoch " + std::to_string(epoch));
    }
    result.validation_loss.push_back(val);
    if (stopper.update(val)) result.weights = weights;
    result.epochs_run = epoch + 1;
    if (stopper.should_stop()) break;
  }
  result.best_epoch = stopper.best_epoch();
  return result;
}

}  // namespace styleforge::trainer
