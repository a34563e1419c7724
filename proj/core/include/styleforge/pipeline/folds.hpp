#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "styleforge/error.hpp"
#include "styleforge/pipeline/manifest.hpp"

namespace styleforge::pipeline {

/// Which real images of a fold must not have sourced its training images.
enum class LeakageScope { Test, TestAndValidation };

std::string_view scope_name(LeakageScope scope);
LeakageScope parse_scope(std::string_view name);

struct Fold {
  std::vector<std::string> test;        // real
  std::vector<std::string> validation;  // real
  std::vector<std::string> training;    // synthetic
};

struct FoldPlan {
  std::size_t k = 0;
  std::uint64_t seed = 0;
  LeakageScope scope = LeakageScope::Test;
  std::vector<Fold> folds;

  /// Throws InvalidArgument on any structural violation: disjoint test and
  /// validation covering exactly `real_ids`, tests partitioning them, and
  /// training ids that are all synthetic records of `synthetic`.
  void validate(const std::vector<std::string>& real_ids, const DatasetManifest& synthetic) const;

  std::string to_json() const;
  static FoldPlan from_json(std::string_view text);
};

/// Raised when leakage filtering leaves a fold without training images.
class EmptyTrainingFold : public Error {
 public:
  using Error::Error;
};

/// Stratified k-fold split of `real` (seeded shuffle per class, dealt round
/// robin). Each fold tests on its own part, validates on the rest, and trains
/// on every labeled synthetic record whose sources avoid the fold's scope.
FoldPlan split_folds(const std::vector<const Record*>& real, const DatasetManifest& synthetic, std::size_t k,
                     std::uint64_t seed, LeakageScope scope = LeakageScope::Test);

struct LeakageViolation {
  std::size_t fold = 0;
  std::string synthetic_id;
  std::string real_id;  // empty when the training id is not a known synthetic record
  friend bool operator==(const LeakageViolation&, const LeakageViolation&) = default;
};

/// Every (fold, training image, source image) where the source lies in the
/// fold's leakage scope.
std::vector<LeakageViolation> leakage_check(const FoldPlan& plan, const DatasetManifest& synthetic);

struct InjectedLeak {
  std::size_t fold = 0;
  std::string synthetic_id;
};

/// Adds up to `count` synthetic ids to training sets of folds whose scope
/// contains one of their sources. Used to audit leakage_check.
std::vector<InjectedLeak> inject_leakage(FoldPlan& plan, const DatasetManifest& synthetic, std::size_t count,
                                         std::uint64_t seed);

}  // namespace styleforge::pipeline
