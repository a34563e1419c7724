#pragma once

#include <span>
#include <string>
#include <vector>

#include "styleforge/featnet/weights.hpp"
#include "styleforge/sample.hpp"
#include "styleforge/trainer/fit.hpp"
#include "styleforge/trainer/metrics.hpp"

namespace styleforge::trainer {

/// Desk-scale classifier architectures:
///   mini-vgg-a  one 3x3 conv per block (8/16/32), dense 32, dropout, head
///   mini-vgg-b  two 3x3 convs per block, same widths
///   mini-dense  stem conv plus two densely connected blocks with concat
std::vector<std::string> architecture_names();
featnet::NetworkSpec architecture_spec(const std::string& name, std::size_t size = 32, std::size_t channels = 3);

/// A trained network with a 2-way softmax head.
struct ClassifierModel {
  std::string architecture;
  featnet::WeightBundle weights;
};

struct TrainedClassifier {
  ClassifierModel model;
  Metrics metrics;
};

/// Trains from a seeded He initialization on `train`, early-stopping on
/// `validation`. The validation set must contain both classes.
TrainedClassifier train_classifier(const std::string& architecture, std::span<const Sample> train,
                                   std::span<const Sample> validation, const TrainConfig& config);

/// Probability of the malignant class for each image, dropout disabled.
std::vector<double> predict_scores(const ClassifierModel& model, std::span<const Image> images);
double predict_score(const featnet::WeightBundle& weights, const Image& image);

std::vector<int> label_vector(std::span<const Sample> samples);

}  // namespace styleforge::trainer
