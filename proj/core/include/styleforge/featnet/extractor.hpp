#pragma once

#include <cstdint>
#include <span>

#include "styleforge/featnet/weights.hpp"
#include "styleforge/sample.hpp"
#include "styleforge/trainer/train_config.hpp"

namespace styleforge::featnet {

inline constexpr std::size_t kMinImagesPerClass = 20;

struct ExtractorTraining {
  WeightBundle weights;
  double holdout_accuracy = 0.0;
  std::size_t holdout_size = 0;
  std::size_t epochs_run = 0;
};

/// Trains the feature network on labeled images. A stratified, seeded 20% of
/// each class is held out for early stopping and for the reported accuracy.
/// Needs both classes with at least kMinImagesPerClass images each.
ExtractorTraining train_feature_extractor(std::span<const Sample> corpus, const NetworkSpec& spec,
                                          const trainer::TrainConfig& config, std::uint64_t seed);

}  // namespace styleforge::featnet
