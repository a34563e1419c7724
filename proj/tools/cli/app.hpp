#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "config.hpp"
#include "styleforge/error.hpp"
#include "styleforge/pipeline/folds.hpp"

namespace styleforge::cli {

enum ExitCode : int { kSuccess = 0, kUsageError = 1, kDataError = 2 };

/// Raised by `split` when the fold plan fails the leakage audit.
class LeakageDetected : public Error {
 public:
  LeakageDetected(std::vector<pipeline::LeakageViolation> violations, const std::string& what)
      : Error(what), violations_(std::move(violations)) {}
  const std::vector<pipeline::LeakageViolation>& violations() const { return violations_; }

 private:
  std::vector<pipeline::LeakageViolation> violations_;
};

struct RunContext {
  ExperimentConfig config;
  bool force_rerun = false;
  std::size_t jobs = 1;
  std::ostream* log = nullptr;  // progress messages; null silences them
};

/// Dataset-relative file names shared by the stages.
namespace files {
inline constexpr const char* kRealManifest = "real.jsonl";
inline constexpr const char* kSyntheticManifest = "synthetic.jsonl";
inline constexpr const char* kFeatnetWeights = "featnet.sfwb";
inline constexpr const char* kPseudoLabels = "pseudo_labels.json";
inline constexpr const char* kFolds = "folds.json";
inline constexpr const char* kMetricsDir = "metrics";
inline constexpr const char* kModelsDir = "models";
inline constexpr const char* kReportText = "report.txt";
inline constexpr const char* kReportJson = "report.json";
}  // namespace files

// Each stage reads the outputs of the previous ones under config.root and
// skips itself when its stamp matches the config digest, unless forced.
void gen_data(const RunContext& ctx);
void train_featnet(const RunContext& ctx);
void synth(const RunContext& ctx);
void pseudo_label(const RunContext& ctx);
void split(const RunContext& ctx, std::size_t inject_leakage = 0);
void train(const RunContext& ctx);
void evaluate(const RunContext& ctx);
/// Aggregates `metrics` (default: every file in the metrics directory) into
/// report.txt and report.json and returns the text table.
std::string report(const RunContext& ctx, const std::vector<std::filesystem::path>& metrics = {});
std::string run_all(const RunContext& ctx);

/// Parses argv, runs one subcommand and maps failures to exit codes:
/// 1 for usage errors, 2 for data or validation errors.
int run_subcommand(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace styleforge::cli
