#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <string>
#include <string_view>
#include <vector>

#include "styleforge/nst/style_transfer.hpp"
#include "styleforge/pipeline/corpus.hpp"
#include "styleforge/pipeline/folds.hpp"
#include "styleforge/trainer/train_config.hpp"

namespace styleforge::cli {

struct ExperimentConfig {
  std::filesystem::path root = "styleforge-data";
  std::uint64_t seed = 7;

  pipeline::CorpusShape corpus{200, 32, 32};
  std::size_t reserve_per_class = 40;

  trainer::TrainConfig featnet;
  nst::StyleTransferConfig nst;
  std::size_t synthesis_budget = 400;
  bool pseudo_label_balance = true;

  std::size_t folds = 5;
  pipeline::LeakageScope leakage_scope = pipeline::LeakageScope::Test;

  std::vector<std::string> architectures = {"mini-vgg-a"};
  trainer::TrainConfig train_with;
  trainer::TrainConfig train_without;

  /// Throws InvalidArgument on any inconsistent field.
  void validate() const;

  /// Every field except the root, in a fixed key order.
  nlohmann::ordered_json to_json() const;

  /// Hex digest of to_json(); the dataset location does not contribute.
  std::string digest() const;

  /// Parses TOML text. Unknown keys are rejected.
  static ExperimentConfig from_toml(std::string_view text, std::string_view source = "config");
  static ExperimentConfig load(const std::filesystem::path& path);
};

/// STYLEFORGE_SEED, when set, replaces the configured seed.
void apply_seed_override(ExperimentConfig& config);

}  // namespace styleforge::cli
