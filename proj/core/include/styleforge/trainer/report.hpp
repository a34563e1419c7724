#pragma once

#include <nlohmann/json.hpp>
#include <string>
#include <vector>

namespace styleforge::trainer {

inline constexpr const char* kWithoutAugmentation = "without-da";
inline constexpr const char* kWithAugmentation = "with-da";

/// Per-fold AUCs of one architecture under one training regime.
struct ResultRow {
  std::string architecture;
  std::string regime;
  std::vector<double> folds;
  double average = 0.0;
};

struct ExperimentReport {
  std::vector<ResultRow> rows;  // without-da rows first, then with-da
  std::size_t fold_count = 0;
  double mean_without = 0.0;
  double mean_with = 0.0;
  // Mean over architectures of (with-da average - without-da average); only
  // meaningful when both regimes are present.
  double improvement = 0.0;
  bool has_improvement = false;
};

/// Computes fold means and the overall improvement. Rejects rows whose fold
/// counts differ. Row order: regime (without-da before with-da), then input
/// order.
ExperimentReport aggregate_results(std::vector<ResultRow> rows);

/// Aligned text table with fold columns 0..k-1 and AVER. Numbers are printed
/// in shortest round-trip form so they parse back to the JSON values exactly.
std::string render_table(const ExperimentReport& report);

nlohmann::ordered_json report_to_json(const ExperimentReport& report);

}  // namespace styleforge::trainer
