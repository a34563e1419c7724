#include "fixtures.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>

#include <unistd.h>

#include "styleforge/featnet/network.hpp"
#include "styleforge/pipeline/corpus.hpp"
#include "styleforge/rng.hpp"

namespace styleforge::testing {

namespace fs = std::filesystem;

TempDir::TempDir(const std::string& prefix) {
  static std::atomic<unsigned> counter{0};
  path_ = fs::temp_directory_path() /
          (prefix + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter.fetch_add(1)));
  fs::remove_all(path_);
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

std::vector<Sample> desk_samples(std::size_t per_class, std::uint64_t seed, std::size_t size) {
  std::vector<Sample> out;
  for (const Label label : {Label::Benign, Label::Malignant}) {
    for (std::size_t i = 0; i < per_class; ++i) {
      const auto image =
          pipeline::render_lesion(label, size, size, derive_seed(seed, 0xc0de + label_index(label), i));
      out.push_back({std::string(label_name(label)) + "_" + std::to_string(i), quantize(image), label});
    }
  }
  return out;
}

const featnet::ExtractorTraining& trained_featnet(std::size_t per_class) {
  static std::mutex mu;
  static std::map<std::size_t, featnet::ExtractorTraining> cache;
  std::lock_guard lock(mu);
  auto it = cache.find(per_class);
  if (it == cache.end()) {
    const auto samples = desk_samples(per_class, 7);
    trainer::TrainConfig cfg;
    cfg.seed = 7;
    it = cache.emplace(per_class, featnet::train_feature_extractor(samples, featnet::feature_extractor_spec(), cfg, 7))
             .first;
  }
  return it->second;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::pair<std::string, std::string>> snapshot(const fs::path& dir) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (entry.is_regular_file()) out.emplace_back(fs::relative(entry.path(), dir).generic_string(), read_text(entry.path()));
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace styleforge::testing
