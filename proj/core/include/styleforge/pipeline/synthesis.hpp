#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "styleforge/error.hpp"
#include "styleforge/featnet/weights.hpp"
#include "styleforge/image.hpp"
#include "styleforge/nst/style_transfer.hpp"
#include "styleforge/pipeline/manifest.hpp"
#include "styleforge/pipeline/pairs.hpp"

namespace styleforge::pipeline {

struct SynthesisFailure {
  std::size_t plan_index = 0;
  std::string content_id;
  std::string style_id;
  std::string message;
};

struct SynthesisBatch {
  // One synthetic record per successful plan entry, in plan order.
  std::vector<Record> records;
  std::vector<SynthesisFailure> failures;
};

/// Raised when more than a tenth of the plan fails.
class SynthesisAborted : public Error {
 public:
  using Error::Error;
};

struct SynthesisOptions {
  std::size_t parallelism = 1;
  // Output directory relative to the dataset root.
  std::string subdir = "synthetic";
  // Extra PNG text chunks for every output.
  std::vector<PngText> text;
  // Called once per finished entry from the collecting thread, in plan order.
  std::function<void(std::size_t done, std::size_t total)> progress;
};

/// Synthesized image id for plan entry `index`.
std::string synthetic_id(std::size_t index);

/// Runs style transfer for every plan entry and writes the outputs under
/// `root`/<subdir>/. Results are independent of the parallelism degree: each
/// job depends only on its entry, and records are emitted in plan order.
/// A non-finite loss skips the entry and is reported as a failure.
SynthesisBatch run_synthesis_batch(const PairPlan& plan, const DatasetManifest& real, const std::filesystem::path& root,
                                   const featnet::WeightBundle& net, const nst::StyleTransferConfig& config,
                                   const SynthesisOptions& options = {});

}  // namespace styleforge::pipeline
