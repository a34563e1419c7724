#pragma once

#include <cstddef>
#include <nlohmann/json.hpp>
#include <span>
#include <string>
#include <vector>

namespace styleforge::trainer {

/// Area under the ROC curve in Mann-Whitney form: the probability that a
/// random positive (label 1) outscores a random negative, ties counting one
/// half. O(n log n). Both classes must be present.
double auc(std::span<const double> scores, std::span<const int> labels);

/// Fraction of samples where (score >= threshold) matches label == 1.
double accuracy(std::span<const double> scores, std::span<const int> labels, double threshold = 0.5);

struct Metrics {
  std::string architecture;
  std::string regime;
  std::size_t fold = 0;
  double validation_auc = 0.0;
  double validation_accuracy = 0.0;
  // Filled in by evaluation on the fold's test set.
  double test_auc = 0.0;
  double test_accuracy = 0.0;
  bool evaluated = false;
  std::size_t best_epoch = 0;
  std::size_t epochs_run = 0;
  std::vector<double> train_loss;
  std::vector<double> validation_loss;
};

template <typename Json>
void to_json(Json& j, const Metrics& m) {
  j = Json{{"architecture", m.architecture},
           {"regime", m.regime},
           {"fold", m.fold},
           {"validation_auc", m.validation_auc},
           {"validation_accuracy", m.validation_accuracy},
           {"evaluated", m.evaluated},
           {"test_auc", m.test_auc},
           {"test_accuracy", m.test_accuracy},
           {"best_epoch", m.best_epoch},
           {"epochs_run", m.epochs_run},
           {"train_loss", m.train_loss},
           {"validation_loss", m.validation_loss}};
}

template <typename Json>
void from_json(const Json& j, Metrics& m) {
  j.at("architecture").get_to(m.architecture);
  j.at("regime").get_to(m.regime);
  j.at("fold").get_to(m.fold);
  j.at("validation_auc").get_to(m.validation_auc);
  j.at("validation_accuracy").get_to(m.validation_accuracy);
  m.evaluated = j.value("evaluated", false);
  m.test_auc = j.value("test_auc", 0.0);
  m.test_accuracy = j.value("test_accuracy", 0.0);
  j.at("best_epoch").get_to(m.best_epoch);
  j.at("epochs_run").get_to(m.epochs_run);
  j.at("train_loss").get_to(m.train_loss);
  j.at("validation_loss").get_to(m.validation_loss);
}

}  // namespace styleforge::trainer
