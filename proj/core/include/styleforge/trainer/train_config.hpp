#pragma once

#include <cstddef>
#include <cstdint>

#include "styleforge/augment/affine.hpp"

namespace styleforge::trainer {

struct TrainConfig {
  std::size_t max_epochs = 50;
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
  double dropout = 0.5;
  std::size_t patience = 5;
  bool augment = true;
  augment::AugmentRanges augment_ranges;
  std::uint64_t seed = 0;

  /// patience < max_epochs, dropout in [0, 1), positive batch and rate.
  void validate() const;
};

}  // namespace styleforge::trainer
