#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "styleforge/error.hpp"
#include "styleforge/featnet/weights.hpp"
#include "styleforge/sample.hpp"
#include "styleforge/trainer/train_config.hpp"

namespace styleforge::trainer {

/// Tracks validation loss and decides when to stop.
class EarlyStopping {
 public:
  explicit EarlyStopping(std::size_t patience) : patience_(patience) {}

  /// Feeds the loss of the next epoch; returns true if it is a new best.
  bool update(double validation_loss);

  bool should_stop() const { return stale_ >= patience_; }
  std::size_t best_epoch() const { return best_epoch_; }
  double best_loss() const { return best_; }
  std::size_t epochs_seen() const { return epochs_; }

 private:
  std::size_t patience_;
  std::size_t stale_ = 0;
  std::size_t epochs_ = 0;
  std::size_t best_epoch_ = 0;
  double best_ = std::numeric_limits<double>::infinity();
};

struct FitResult {
  // Weights from the epoch with the lowest validation loss.
  featnet::WeightBundle weights;
  std::vector<double> train_loss;
  std::vector<double> validation_loss;
  std::size_t best_epoch = 0;
  std::size_t epochs_run = 0;
};

class TrainingDiverged : public Error {
 public:
  TrainingDiverged(std::size_t epoch, const std::string& what) : Error(what), epoch_(epoch) {}
  std::size_t epoch() const { return epoch_; }

 private:
  std::size_t epoch_;
};

/// Mini-batch Adam on softmax cross-entropy. Each epoch reshuffles the
/// training set, applies random affine augmentation per sample (if enabled)
/// and dropout; validation runs without either. Stops after `patience`
/// epochs without a validation improvement and restores the best weights.
FitResult fit(const featnet::WeightBundle& initial, std::span<const Sample> train,
              std::span<const Sample> validation, const TrainConfig& config);

/// Mean cross-entropy with dropout disabled.
double mean_loss(const featnet::WeightBundle& net, std::span<const Sample> samples);

}  // namespace styleforge::trainer
