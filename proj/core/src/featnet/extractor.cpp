#include "styleforge/featnet/extractor.hpp"

#include <array>

#include "styleforge/featnet/model.hpp"
#include "styleforge/rng.hpp"
#include "styleforge/trainer/fit.hpp"

namespace styleforge::featnet {

ExtractorTraining train_feature_extractor(std::span<const Sample> corpus, const NetworkSpec& spec,
                                          const trainer::TrainConfig& config, std::uint64_t seed) {
  spec.validate();
  std::array<std::vector<std::size_t>, kNumClasses> by_class;
  for (std::size_t i = 0; i < corpus.size(); ++i) by_class[label_index(corpus[i].label)].push_back(i);
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    if (by_class[c].size() < kMinImagesPerClass) {
      throw InvalidArgument("feature extractor training needs at least " + std::to_string(kMinImagesPerClass) +
                            " images in each of " + std::to_string(kNumClasses) + " classes; class '" +
                            std::string(label_name(static_cast<Label>(c))) + "' has " +
                            std::to_string(by_class[c].size()));
    }
  }

  Rng rng(derive_seed(seed, 0x5f1d));
  std::vector<Sample> train, holdout;
  for (auto& ids : by_class) {
    rng.shuffle(ids);
    const std::size_t held = ids.size() / 5;
    for (std::size_t k = 0; k < ids.size(); ++k) (k < held ? holdout : train).push_back(corpus[ids[k]]);
  }

  trainer::TrainConfig cfg = config;
  cfg.seed = seed;
  auto fitted = trainer::fit(init_weights(spec, derive_seed(seed, 0x1417)), train, holdout, cfg);

  ExtractorTraining out;
  out.weights = std::move(fitted.weights);
  out.weights.seed = seed;
  out.epochs_run = fitted.epochs_run;
  out.holdout_size = holdout.size();
  std::size_t hits = 0;
  for (const auto& s : holdout) {
    const auto p = predict_proba(out.weights, s.image);
    const Label predicted = p[label_index(Label::Malignant)] >= 0.5 ? Label::Malignant : Label::Benign;
    hits += predicted == s.label ? 1 : 0;
  }
  out.holdout_accuracy = static_cast<double>(hits) / static_cast<double>(holdout.size());
  return out;
}

}  // namespace styleforge::featnet
