#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "styleforge/error.hpp"
#include "styleforge/featnet/weights.hpp"
#include "styleforge/pipeline/manifest.hpp"
#include "styleforge/sample.hpp"

namespace styleforge::pipeline {

struct ImageScore {
  std::string id;
  std::optional<double> score;  // probability of the malignant class
  std::string error;            // set when the image could not be scored
};

/// Scores every synthetic record of `manifest` with the classifier head of
/// `classifier`. Unreadable or mis-sized images are reported per image.
std::vector<ImageScore> pseudo_label_scores(const featnet::WeightBundle& classifier, const DatasetManifest& manifest,
                                            const std::filesystem::path& root);

enum class LabelRule { Balanced, FixedCut, Alternating };

struct PseudoLabelReport {
  std::vector<double> scores;
  std::vector<Label> labels;  // aligned with scores
  double threshold = 0.5;
  std::size_t benign = 0;
  std::size_t malignant = 0;
  LabelRule rule = LabelRule::Balanced;
};

/// Thrown when no cut of the scores leaves class counts within one.
class NoBalancingThreshold : public Error {
 public:
  using Error::Error;
};

/// Threshold t (score >= t is malignant) whose class counts differ by at most
/// one: the midpoint of the two scores straddling the median. For odd counts
/// the cut with the smaller malignant side is tried first.
PseudoLabelReport balance_threshold(std::span<const double> scores);

/// Labels by a fixed cut at `threshold`.
PseudoLabelReport fixed_threshold(std::span<const double> scores, double threshold = 0.5);

/// Sorts by score (ties by position) and alternates benign, malignant, ...
PseudoLabelReport alternating_labels(std::span<const double> scores);

/// Balanced labels when a threshold exists, otherwise the alternating
/// fallback; `balance` false selects the fixed 0.5 cut.
PseudoLabelReport assign_pseudo_labels(std::span<const double> scores, bool balance);

std::string_view rule_name(LabelRule rule);

}  // namespace styleforge::pipeline
