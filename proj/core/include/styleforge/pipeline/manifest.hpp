#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "styleforge/sample.hpp"

namespace styleforge::pipeline {

enum class Source { Real, Synthetic };

struct SourcePair {
  std::string content_id;
  std::string style_id;
  std::uint64_t seed = 0;
  friend bool operator==(const SourcePair&, const SourcePair&) = default;
};

/// One image of the dataset. Real records carry a class label; synthetic
/// records carry provenance and, once scored, a pseudo-label and score.
struct Record {
  std::string id;
  std::string path;  // relative to the dataset root
  Source source = Source::Real;
  std::optional<Label> label;
  std::optional<Label> pseudo_label;
  std::optional<double> score;
  std::optional<SourcePair> provenance;

  /// The label used for training: the real label or the pseudo-label.
  std::optional<Label> training_label() const { return source == Source::Real ? label : pseudo_label; }

  friend bool operator==(const Record&, const Record&) = default;
};

/// Append-only record set with unique ids.
class DatasetManifest {
 public:
  /// Rejects duplicate ids and records that break the real/synthetic field
  /// rules.
  void append(Record record);

  /// Sets the pseudo-label of a synthetic record. Real records are immutable
  /// and rejected.
  void set_pseudo_label(std::string_view id, Label label, double score);

  const std::vector<Record>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  bool contains(std::string_view id) const;
  const Record& at(std::string_view id) const;

  std::vector<const Record*> with_source(Source source) const;
  std::vector<const Record*> real_with_label(Label label) const;

  /// JSON Lines, one record per line, stable key order.
  std::string to_jsonl() const;
  static DatasetManifest from_jsonl(std::string_view text);

  void save(const std::filesystem::path& path) const;
  static DatasetManifest load(const std::filesystem::path& path);

 private:
  std::vector<Record> records_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

/// Loads the images of `records` from `root` with their training labels.
/// Records without a label are rejected.
std::vector<Sample> load_samples(const std::filesystem::path& root, const std::vector<const Record*>& records);

}  // namespace styleforge::pipeline
