#include "styleforge/trainer/classifier.hpp"

#include <algorithm>

#include "styleforge/featnet/model.hpp"
#include "styleforge/rng.hpp"

namespace styleforge::trainer {

using featnet::LayerDesc;
using featnet::LayerKind;

std::vector<std::string> architecture_names() { return {"mini-vgg-a", "mini-vgg-b", "mini-dense"}; }

namespace {

LayerDesc conv(std::string name, std::size_t units, std::size_t kernel = 3, std::vector<std::string> inputs = {}) {
  return {std::move(name), LayerKind::Conv, kernel, units, true, std::move(inputs)};
}
LayerDesc pool(std::string name) { return {std::move(name), LayerKind::Pool, 0, 0, false, {}}; }

void add_head(featnet::NetworkSpec& spec) {
  spec.layers.push_back({"fc1", LayerKind::Dense, 0, 32, true, {}});
  spec.layers.push_back({"drop1", LayerKind::Dropout, 0, 0, false, {}});
  spec.layers.push_back({"fc2", LayerKind::Dense, 0, 2, false, {}});
}

}  // namespace

featnet::NetworkSpec architecture_spec(const std::string& name, std::size_t size, std::size_t channels) {
  featnet::NetworkSpec spec;
  spec.tag = name;
  spec.height = size;
  spec.width = size;
  spec.channels = channels;
  const std::size_t widths[3] = {8, 16, 32};
  if (name == "mini-vgg-a" || name == "mini-vgg-b") {
    const bool twice = name == "mini-vgg-b";
    for (std::size_t b = 0; b < 3; ++b) {
      const std::string block = std::to_string(b + 1);
      spec.layers.push_back(conv("conv" + block + "_1", widths[b]));
      if (twice) spec.layers.push_back(conv("conv" + block + "_2", widths[b]));
      spec.layers.push_back(pool("pool" + block));
    }
  } else if (name == "mini-dense") {
    spec.layers.push_back(conv("stem", 8));
    spec.layers.push_back(pool("pool0"));
    for (std::size_t b = 1; b <= 2; ++b) {
      const std::string p = "block" + std::to_string(b);
      const std::string in = spec.layers.back().name;
      spec.layers.push_back(conv(p + "_conv1", 8, 3, {in}));
      spec.layers.push_back({p + "_cat1", LayerKind::Concat, 0, 0, false, {in, p + "_conv1"}});
      spec.layers.push_back(conv(p + "_conv2", 8));
      spec.layers.push_back({p + "_cat2", LayerKind::Concat, 0, 0, false, {in, p + "_conv1", p + "_conv2"}});
      spec.layers.push_back(conv(p + "_transition", 16 * b, 1));
      spec.layers.push_back(pool(p + "_pool"));
    }
  } else {
    std::string valid;
    for (const auto& n : architecture_names()) valid += " " + n;
    throw InvalidArgument("unknown architecture '" + name + "'; known:" + valid);
  }
  add_head(spec);
  spec.validate();
  return spec;
}

std::vector<int> label_vector(std::span<const Sample> samples) {
  std::vector<int> labels;
  labels.reserve(samples.size());
  for (const auto& s : samples) labels.push_back(static_cast<int>(label_index(s.label)));
  return labels;
}

double predict_score(const featnet::WeightBundle& weights, const Image& image) {
  return featnet::predict_proba(weights, image)[label_index(Label::Malignant)];
}

std::vector<double> predict_scores(const ClassifierModel& model, std::span<const Image> images) {
  std::vector<double> scores;
  scores.reserve(images.size());
  for (const auto& img : images) scores.push_back(predict_score(model.weights, img));
  return scores;
}

TrainedClassifier train_classifier(const std::string& architecture, std::span<const Sample> train,
                                   std::span<const Sample> validation, const TrainConfig& config) {
  const auto labels = label_vector(validation);
  const bool has_both = std::count(labels.begin(), labels.end(), 0) > 0 && std::count(labels.begin(), labels.end(), 1) > 0;
  if (!has_both) throw InvalidArgument("validation set must contain both classes");
  if (train.empty()) throw InvalidArgument("training set is empty");

  const auto spec = architecture_spec(architecture, train.front().image.height(), train.front().image.channels());
  const auto initial = featnet::init_weights(spec, derive_seed(config.seed, 0x1417));
  FitResult fitted = fit(initial, train, validation, config);
  fitted.weights.seed = config.seed;

  TrainedClassifier out;
  out.model = {architecture, std::move(fitted.weights)};
  std::vector<double> scores;
  scores.reserve(validation.size());
  for (const auto& s : validation) scores.push_back(predict_score(out.model.weights, s.image));
  out.metrics.architecture = architecture;
  out.metrics.validation_auc = auc(scores, labels);
  out.metrics.validation_accuracy = accuracy(scores, labels);
  out.metrics.best_epoch = fitted.best_epoch;
  out.metrics.epochs_run = fitted.epochs_run;
  out.metrics.train_loss = std::move(fitted.train_loss);
  out.metrics.validation_loss = std::move(fitted.validation_loss);
  return out;
}

}  // namespace styleforge::trainer
