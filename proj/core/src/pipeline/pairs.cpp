#include "styleforge/pipeline/pairs.hpp"

#include <fmt/format.h>
#include <set>

#include "styleforge/error.hpp"
#include "styleforge/rng.hpp"

namespace styleforge::pipeline {

namespace {

// Seeds stay within 53 bits so they survive a round trip through any JSON
// reader that stores numbers as doubles.
constexpr std::uint64_t kSeedMask = (std::uint64_t{1} << 53) - 1;

}  // namespace

PairPlan plan_pairs(const std::vector<std::string>& contents, const std::vector<std::string>& styles,
                    std::size_t budget, std::uint64_t seed) {
  if (contents.empty() || styles.empty()) {
    throw InvalidArgument(fmt::format("pair planning needs at least one image of each class (got {} benign, {} malignant)",
                                      contents.size(), styles.size()));
  }
  const std::size_t maximum = contents.size() * styles.size();
  if (budget > maximum) {
    throw InvalidArgument(fmt::format("pair budget {} exceeds the {} x {} = {} distinct pairs available", budget,
                                      contents.size(), styles.size(), maximum));
  }
  auto c = contents;
  auto s = styles;
  Rng rng(derive_seed(seed, 0x9a1));
  rng.shuffle(c);
  rng.shuffle(s);

  PairPlan plan;
  plan.entries.reserve(budget);
  for (std::size_t k = 0; k < budget; ++k) {
    const std::size_t round = k / c.size(), i = k % c.size();
    plan.entries.push_back({c[i], s[(i + round) % s.size()], derive_seed(seed, 0x9a2, k) & kSeedMask});
  }
  return plan;
}

PairPlan plan_pairs(const DatasetManifest& manifest, std::size_t budget, std::uint64_t seed,
                    const std::vector<std::string>& pool) {
  const std::set<std::string> allowed(pool.begin(), pool.end());
  auto ids = [&](Label label) {
    std::vector<std::string> out;
    for (const Record* r : manifest.real_with_label(label)) {
      if (allowed.empty() || allowed.contains(r->id)) out.push_back(r->id);
    }
    return out;
  };
  return plan_pairs(ids(Label::Benign), ids(Label::Malignant), budget, seed);
}

}  // namespace styleforge::pipeline
