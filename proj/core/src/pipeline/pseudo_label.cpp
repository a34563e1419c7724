#include "styleforge/pipeline/pseudo_label.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <numeric>

#include "styleforge/featnet/model.hpp"

namespace styleforge::pipeline {

namespace {

PseudoLabelReport label_by_cut(std::span<const double> scores, double threshold, LabelRule rule) {
  PseudoLabelReport rep;
  rep.scores.assign(scores.begin(), scores.end());
  rep.threshold = threshold;
  rep.rule = rule;
  rep.labels.reserve(scores.size());
  for (const double s : scores) {
    const Label l = s >= threshold ? Label::Malignant : Label::Benign;
    rep.labels.push_back(l);
    (l == Label::Malignant ? rep.malignant : rep.benign) += 1;
  }
  return rep;
}

void check_scores(std::span<const double> scores) {
  for (const double s : scores) {
    if (!std::isfinite(s)) throw InvalidArgument("pseudo-label scores must be finite");
  }
}

}  // namespace

std::vector<ImageScore> pseudo_label_scores(const featnet::WeightBundle& classifier, const DatasetManifest& manifest,
                                            const std::filesystem::path& root) {
  std::vector<ImageScore> out;
  for (const Record* r : manifest.with_source(Source::Synthetic)) {
    ImageScore s{r->id, std::nullopt, {}};
    try {
      const auto p = featnet::predict_proba(classifier, read_png(root / r->path));
      s.score = p[label_index(Label::Malignant)];
    } catch (const Error& e) {
      s.error = e.what();
    }
    out.push_back(std::move(s));
  }
  return out;
}

PseudoLabelReport balance_threshold(std::span<const double> scores) {
  if (scores.size() < 2) throw InvalidArgument("balancing needs at least two scores");
  check_scores(scores);
  std::vector<double> sorted(scores.begin(), scores.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();

  // k = number of scores below the threshold.
  std::vector<std::size_t> cuts{n / 2};
  if (n % 2 == 1) cuts.push_back(n / 2 + 1);
  for (const std::size_t k : cuts) {
    const double lo = sorted[k - 1], hi = sorted[k];
    if (!(lo < hi)) continue;
    double t = lo + (hi - lo) / 2.0;
    if (!(t > lo)) t = hi;
    return label_by_cut(scores, t, LabelRule::Balanced);
  }
  throw NoBalancingThreshold(fmt::format(
      "no threshold balances {} scores: values around the median are tied at {}", n, sorted[n / 2]));
}

PseudoLabelReport fixed_threshold(std::span<const double> scores, double threshold) {
  check_scores(scores);
  return label_by_cut(scores, threshold, LabelRule::FixedCut);
}

PseudoLabelReport alternating_labels(std::span<const double> scores) {
  check_scores(scores);
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  PseudoLabelReport rep;
  rep.scores.assign(scores.begin(), scores.end());
  rep.labels.assign(scores.size(), Label::Benign);
  rep.rule = LabelRule::Alternating;
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    const Label l = rank % 2 == 0 ? Label::Benign : Label::Malignant;
    rep.labels[order[rank]] = l;
    (l == Label::Malignant ? rep.malignant : rep.benign) += 1;
  }
  if (!order.empty()) rep.threshold = scores[order[order.size() / 2]];
  return rep;
}

PseudoLabelReport assign_pseudo_labels(std::span<const double> scores, bool balance) {
  if (!balance) return fixed_threshold(scores, 0.5);
  try {
    return balance_threshold(scores);
  } catch (const NoBalancingThreshold&) {
    return alternating_labels(scores);
  }
}

std::string_view rule_name(LabelRule rule) {
  switch (rule) {
    case LabelRule::Balanced:
      return "balanced";
    case LabelRule::FixedCut:
      return "fixed";
    case LabelRule::Alternating:
      return "alternating";
  }
  return "unknown";
}

}  // namespace styleforge::pipeline
