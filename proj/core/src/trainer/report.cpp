#include "styleforge/trainer/report.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <map>

#include "styleforge/error.hpp"

namespace styleforge::trainer {

namespace {

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

int regime_rank(const std::string& regime) {
  if (regime == kWithoutAugmentation) return 0;
  if (regime == kWithAugmentation) return 1;
  return 2;
}

std::string regime_title(const std::string& regime) {
  if (regime == kWithoutAugmentation) return "Without Data Augmentation";
  if (regime == kWithAugmentation) return "With Data Augmentation";
  return regime;
}

}  // namespace

ExperimentReport aggregate_results(std::vector<ResultRow> rows) {
  if (rows.empty()) throw InvalidArgument("aggregate_results: no rows");
  ExperimentReport report;
  report.fold_count = rows.front().folds.size();
  for (const auto& r : rows) {
    if (r.folds.size() != report.fold_count || r.folds.empty()) {
      throw InvalidArgument("ragged fold data: row " + r.architecture + "/" + r.regime + " has " +
                            std::to_string(r.folds.size()) + " folds, expected " +
                            std::to_string(report.fold_count));
    }
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const ResultRow& a, const ResultRow& b) { return regime_rank(a.regime) < regime_rank(b.regime); });

  std::map<std::string, double> without, with;
  std::vector<std::string> arch_order;
  double sum_without = 0.0, sum_with = 0.0;
  std::size_t n_without = 0, n_with = 0;
  for (auto& r : rows) {
    r.average = mean(r.folds);
    if (std::find(arch_order.begin(), arch_order.end(), r.architecture) == arch_order.end()) {
      arch_order.push_back(r.architecture);
    }
    if (r.regime == kWithoutAugmentation) {
      without[r.architecture] = r.average;
      sum_without += r.average;
      ++n_without;
    } else if (r.regime == kWithAugmentation) {
      with[r.architecture] = r.average;
      sum_with += r.average;
      ++n_with;
    }
  }
  report.mean_without = n_without ? sum_without / static_cast<double>(n_without) : 0.0;
  report.mean_with = n_with ? sum_with / static_cast<double>(n_with) : 0.0;

  double diff_sum = 0.0;
  std::size_t paired = 0;
  for (const auto& arch : arch_order) {
    if (without.count(arch) && with.count(arch)) {
      diff_sum += with[arch] - without[arch];
      ++paired;
    }
  }
  if (paired > 0) {
    report.improvement = diff_sum / static_cast<double>(paired);
    report.has_improvement = true;
  }
  report.rows = std::move(rows);
  return report;
}

std::string render_table(const ExperimentReport& report) {
  std::size_t arch_width = std::string("Architecture").size();
  std::size_t regime_width = 0;
  std::size_t num_width = 5;
  for (const auto& r : report.rows) {
    arch_width = std::max(arch_width, r.architecture.size());
    regime_width = std::max(regime_width, regime_title(r.regime).size());
    for (double v : r.folds) num_width = std::max(num_width, fmt::format("{}", v).size());
    num_width = std::max(num_width, fmt::format("{}", r.average).size());
  }

  std::string out;
  out += fmt::format("{:<{}}  {:<{}}", "", regime_width, "Architecture", arch_width);
  for (std::size_t f = 0; f < report.fold_count; ++f) out += fmt::format("  {:>{}}", f, num_width);
  out += fmt::format("  {:>{}}\n", "AVER", num_width);

  std::string last_regime;
  for (const auto& r : report.rows) {
    const std::string title = r.regime == last_regime ? "" : regime_title(r.regime);
    last_regime = r.regime;
    out += fmt::format("{:<{}}  {:<{}}", title, regime_width, r.architecture, arch_width);
    for (double v : r.folds) out += fmt::format("  {:>{}}", fmt::format("{}", v), num_width);
    out += fmt::format("  {:>{}}\n", fmt::format("{}", r.average), num_width);
  }
  if (report.has_improvement) {
    out += fmt::format("\nMean AUC without DA: {}\nMean AUC with DA: {}\nImprovement: {} ({:.2f}%)\n",
                       report.mean_without, report.mean_with, report.improvement, report.improvement * 100.0);
  }
  return out;
}

nlohmann::ordered_json report_to_json(const ExperimentReport& report) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"architecture", r.architecture}, {"regime", r.regime}, {"folds", r.folds}, {"average", r.average}});
  }
  nlohmann::ordered_json j = {{"fold_count", report.fold_count}, {"rows", rows}};
  j["mean_without"] = report.mean_without;
  j["mean_with"] = report.mean_with;
  if (report.has_improvement) j["improvement"] = report.improvement;
  return j;
}

}  // namespace styleforge::trainer
