#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "styleforge/featnet/extractor.hpp"
#include "styleforge/sample.hpp"

namespace styleforge::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& prefix = "styleforge");
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  std::filesystem::path path_;
};

/// Corpus images rendered in memory with the same per-image seeds the corpus
/// generator uses, quantized as if read back from PNG.
std::vector<Sample> desk_samples(std::size_t per_class, std::uint64_t seed, std::size_t size = 32);

/// Feature network trained once per process on desk_samples(per_class, 7).
const featnet::ExtractorTraining& trained_featnet(std::size_t per_class);

/// Every regular file under `dir` mapped to its bytes, keyed by relative path.
std::vector<std::pair<std::string, std::string>> snapshot(const std::filesystem::path& dir);

std::string read_text(const std::filesystem::path& path);

}  // namespace styleforge::testing
