#include "styleforge/trainer/metrics.hpp"

#include <algorithm>
#include <numeric>

#include "styleforge/error.hpp"

namespace styleforge::trainer {

namespace {

void check_inputs(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw InvalidArgument("scores and labels differ in length (" + std::to_string(scores.size()) + " vs " +
                          std::to_string(labels.size()) + ")");
  }
  for (int l : labels) {
    if (l != 0 && l != 1) throw InvalidArgument("labels must be 0 or 1");
  }
}

}  // namespace

double auc(std::span<const double> scores, std::span<const int> labels) {
  check_inputs(scores, labels);
  const auto positives = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
  const std::size_t negatives = labels.size() - positives;
  if (positives == 0 || negatives == 0) throw InvalidArgument("auc needs both classes present");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Sum of 1-based average ranks of the positives; ranks are multiples of 1/2
  // and stay exact in double precision.
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]] == 1) rank_sum += avg_rank;
    }
    i = j;
  }
  const double p = static_cast<double>(positives);
  const double n = static_cast<double>(negatives);
  return (rank_sum - p * (p + 1.0) / 2.0) / (p * n);
}

double accuracy(std::span<const double> scores, std::span<const int> labels, double threshold) {
  check_inputs(scores, labels);
  if (scores.empty()) throw InvalidArgument("accuracy of an empty set");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) hits += ((scores[i] >= threshold) == (labels[i] == 1)) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(scores.size());
}

}  // namespace styleforge::trainer
