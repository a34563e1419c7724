#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "styleforge/pipeline/manifest.hpp"

namespace styleforge::pipeline {

struct PairEntry {
  std::string content_id;  // benign
  std::string style_id;    // malignant
  std::uint64_t seed = 0;
  friend bool operator==(const PairEntry&, const PairEntry&) = default;
};

struct PairPlan {
  std::vector<PairEntry> entries;
  std::size_t size() const { return entries.size(); }
  bool empty() const { return entries.empty(); }
};

/// Picks `budget` distinct (content, style) pairs. Content ids are shuffled
/// and visited round-robin, so every content image is used once before any is
/// reused; within round r content i is paired with shuffled style (i + r).
PairPlan plan_pairs(const std::vector<std::string>& contents, const std::vector<std::string>& styles,
                    std::size_t budget, std::uint64_t seed);

/// Same, drawing contents from the benign and styles from the malignant real
/// records of `manifest`. When `pool` is non-empty only those ids are used.
PairPlan plan_pairs(const DatasetManifest& manifest, std::size_t budget, std::uint64_t seed,
                    const std::vector<std::string>& pool = {});

}  // namespace styleforge::pipeline
