#include "styleforge/pipeline/folds.hpp"

#include <array>
#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <map>
#include <set>

#include "styleforge/rng.hpp"

namespace styleforge::pipeline {

namespace {

std::set<std::string, std::less<>> scope_ids(const Fold& fold, LeakageScope scope) {
  std::set<std::string, std::less<>> ids(fold.test.begin(), fold.test.end());
  if (scope == LeakageScope::TestAndValidation) ids.insert(fold.validation.begin(), fold.validation.end());
  return ids;
}

}  // namespace

std::string_view scope_name(LeakageScope scope) {
  return scope == LeakageScope::Test ? "test" : "test_and_val";
}

LeakageScope parse_scope(std::string_view name) {
  if (name == "test") return LeakageScope::Test;
  if (name == "test_and_val") return LeakageScope::TestAndValidation;
  throw InvalidArgument("unknown leakage scope '" + std::string(name) + "' (expected test or test_and_val)");
}

void FoldPlan::validate(const std::vector<std::string>& real_ids, const DatasetManifest& synthetic) const {
  if (folds.size() != k) throw InvalidArgument(fmt::format("fold plan declares k={} but has {} folds", k, folds.size()));
  const std::set<std::string> all(real_ids.begin(), real_ids.end());
  std::set<std::string> tested;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    const Fold& fold = folds[f];
    std::set<std::string> seen;
    for (const auto& id : fold.test) {
      if (!all.contains(id)) throw InvalidArgument(fmt::format("fold {} tests on unknown real id '{}'", f, id));
      if (!tested.insert(id).second) throw InvalidArgument(fmt::format("real id '{}' is tested in two folds", id));
      seen.insert(id);
    }
    for (const auto& id : fold.validation) {
      if (!all.contains(id)) throw InvalidArgument(fmt::format("fold {} validates on unknown real id '{}'", f, id));
      if (!seen.insert(id).second) throw InvalidArgument(fmt::format("fold {} uses '{}' for test and validation", f, id));
    }
    if (seen != all) throw InvalidArgument(fmt::format("fold {} test and validation do not cover the real set", f));
    for (const auto& id : fold.training) {
      if (!synthetic.contains(id) || synthetic.at(id).source != Source::Synthetic) {
        throw InvalidArgument(fmt::format("fold {} trains on '{}', which is not a synthetic record", f, id));
      }
    }
  }
  if (tested != all) throw InvalidArgument("fold test sets do not cover the real set");
}

std::string FoldPlan::to_json() const {
  nlohmann::ordered_json j;
  j["k"] = k;
  j["seed"] = seed;
  j["leakage_scope"] = scope_name(scope);
  j["folds"] = nlohmann::ordered_json::array();
  for (std::size_t f = 0; f < folds.size(); ++f) {
    j["folds"].push_back({{"fold", f},
                          {"test", folds[f].test},
                          {"validation", folds[f].validation},
                          {"training", folds[f].training}});
  }
  return j.dump(2) + "\n";
}

FoldPlan FoldPlan::from_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    FoldPlan plan;
    plan.k = j.at("k").get<std::size_t>();
    plan.seed = j.at("seed").get<std::uint64_t>();
    plan.scope = parse_scope(j.at("leakage_scope").get<std::string>());
    for (const auto& f : j.at("folds")) {
      plan.folds.push_back({f.at("test").get<std::vector<std::string>>(),
                            f.at("validation").get<std::vector<std::string>>(),
                            f.at("training").get<std::vector<std::string>>()});
    }
    return plan;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("malformed fold plan: ") + e.what());
  }
}

FoldPlan split_folds(const std::vector<const Record*>& real, const DatasetManifest& synthetic, std::size_t k,
                     std::uint64_t seed, LeakageScope scope) {
  if (k < 2) throw InvalidArgument(fmt::format("fold count must be at least 2, got {}", k));
  std::array<std::vector<std::string>, kNumClasses> by_class;
  for (const Record* r : real) {
    if (r->source != Source::Real || !r->label) throw InvalidArgument("split_folds got non-real record '" + r->id + "'");
    by_class[label_index(*r->label)].push_back(r->id);
  }
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    if (by_class[c].size() < k) {
      throw InvalidArgument(fmt::format("{} folds need at least {} '{}' images, got {}", k, k,
                                        label_name(static_cast<Label>(c)), by_class[c].size()));
    }
  }

  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  plan.scope = scope;
  plan.folds.resize(k);
  std::map<std::string, std::size_t> fold_of;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    auto ids = by_class[c];
    Rng rng(derive_seed(seed, 0xf01d, c));
    rng.shuffle(ids);
    for (std::size_t i = 0; i < ids.size(); ++i) fold_of[ids[i]] = i % k;
  }
  // Keep manifest order inside every list.
  for (const Record* r : real) {
    const std::size_t home = fold_of.at(r->id);
    for (std::size_t f = 0; f < k; ++f) (f == home ? plan.folds[f].test : plan.folds[f].validation).push_back(r->id);
  }

  const auto candidates = synthetic.with_source(Source::Synthetic);
  for (std::size_t f = 0; f < k; ++f) {
    const auto blocked = scope_ids(plan.folds[f], scope);
    std::size_t unlabeled = 0, leaking = 0;
    for (const Record* s : candidates) {
      if (!s->pseudo_label) {
        ++unlabeled;
        continue;
      }
      if (blocked.contains(s->provenance->content_id) || blocked.contains(s->provenance->style_id)) {
        ++leaking;
        continue;
      }
      plan.folds[f].training.push_back(s->id);
    }
    if (plan.folds[f].training.empty()) {
      throw EmptyTrainingFold(fmt::format(
          "fold {} has no training images: {} synthetic, {} unlabeled, {} removed by the {} leakage filter", f,
          candidates.size(), unlabeled, leaking, scope_name(scope)));
    }
  }
  return plan;
}

std::vector<LeakageViolation> leakage_check(const FoldPlan& plan, const DatasetManifest& synthetic) {
  std::vector<LeakageViolation> out;
  for (std::size_t f = 0; f < plan.folds.size(); ++f) {
    const auto blocked = scope_ids(plan.folds[f], plan.scope);
    for (const auto& id : plan.folds[f].training) {
      if (!synthetic.contains(id) || !synthetic.at(id).provenance) {
        out.push_back({f, id, {}});
        continue;
      }
      const auto& p = *synthetic.at(id).provenance;
      if (blocked.contains(p.content_id)) out.push_back({f, id, p.content_id});
      if (blocked.contains(p.style_id)) out.push_back({f, id, p.style_id});
    }
  }
  return out;
}

std::vector<InjectedLeak> inject_leakage(FoldPlan& plan, const DatasetManifest& synthetic, std::size_t count,
                                         std::uint64_t seed) {
  std::vector<InjectedLeak> candidates;
  for (std::size_t f = 0; f < plan.folds.size(); ++f) {
    const auto blocked = scope_ids(plan.folds[f], plan.scope);
    const std::set<std::string> present(plan.folds[f].training.begin(), plan.folds[f].training.end());
    for (const Record* s : synthetic.with_source(Source::Synthetic)) {
      if (present.contains(s->id)) continue;
      if (blocked.contains(s->provenance->content_id) || blocked.contains(s->provenance->style_id)) {
        candidates.push_back({f, s->id});
      }
    }
  }
  Rng rng(derive_seed(seed, 0x1eac));
  rng.shuffle(candidates);
  if (candidates.size() > count) candidates.resize(count);
  for (const auto& leak : candidates) plan.folds[leak.fold].training.push_back(leak.synthetic_id);
  return candidates;
}

}  // namespace styleforge::pipeline
