#include "config.hpp"

#include <algorithm>
#include <cerrno>
#include <cstdlib>
#include <fmt/format.h>
#include <fmt/ranges.h>
#include <fstream>
#include <set>
#include <sstream>
#include <toml.hpp>

#include "styleforge/digest.hpp"
#include "styleforge/error.hpp"
#include "styleforge/featnet/network.hpp"
#include "styleforge/trainer/classifier.hpp"

namespace styleforge::cli {

namespace {

void reject_unknown(const toml::table& table, std::string_view where, std::initializer_list<std::string_view> known) {
  const std::set<std::string_view> allowed(known);
  for (const auto& [key, value] : table) {
    if (!allowed.contains(key.str())) {
      throw InvalidArgument(fmt::format("unknown key '{}' in [{}]", key.str(), where));
    }
  }
}

const toml::table* subtable(const toml::table& table, std::string_view key, std::string_view where) {
  const auto* node = table.get(key);
  if (node == nullptr) return nullptr;
  const auto* t = node->as_table();
  if (t == nullptr) throw InvalidArgument(fmt::format("'{}' in [{}] must be a table", key, where));
  return t;
}

template <typename T>
void read(const toml::table& table, std::string_view key, std::string_view where, T& out) {
  const auto* node = table.get(key);
  if (node == nullptr) return;
  if constexpr (std::is_same_v<T, bool>) {
    const auto v = node->value<bool>();
    if (!v) throw InvalidArgument(fmt::format("'{}' in [{}] must be a boolean", key, where));
    out = *v;
  } else if constexpr (std::is_same_v<T, double>) {
    const auto v = node->value<double>();
    if (!v) throw InvalidArgument(fmt::format("'{}' in [{}] must be a number", key, where));
    out = *v;
  } else if constexpr (std::is_integral_v<T>) {
    const auto v = node->value<std::int64_t>();
    if (!v || *v < 0) throw InvalidArgument(fmt::format("'{}' in [{}] must be a non-negative integer", key, where));
    out = static_cast<T>(*v);
  } else if constexpr (std::is_same_v<T, std::string>) {
    const auto v = node->value<std::string>();
    if (!v) throw InvalidArgument(fmt::format("'{}' in [{}] must be a string", key, where));
    out = *v;
  } else {
    const auto* arr = node->as_array();
    if (arr == nullptr) throw InvalidArgument(fmt::format("'{}' in [{}] must be an array of strings", key, where));
    out.clear();
    for (const auto& item : *arr) {
      const auto v = item.value<std::string>();
      if (!v) throw InvalidArgument(fmt::format("'{}' in [{}] must be an array of strings", key, where));
      out.push_back(*v);
    }
  }
}

void read_train(const toml::table* table, std::string_view where, trainer::TrainConfig& cfg) {
  if (table == nullptr) return;
  reject_unknown(*table, where,
                 {"max_epochs", "batch_size", "learning_rate", "dropout", "patience", "augment", "augment_ranges"});
  read(*table, "max_epochs", where, cfg.max_epochs);
  read(*table, "batch_size", where, cfg.batch_size);
  read(*table, "learning_rate", where, cfg.learning_rate);
  read(*table, "dropout", where, cfg.dropout);
  read(*table, "patience", where, cfg.patience);
  read(*table, "augment", where, cfg.augment);
  const std::string ranges_where = std::string(where) + ".augment_ranges";
  if (const auto* r = subtable(*table, "augment_ranges", where)) {
    reject_unknown(*r, ranges_where, {"rotation_degrees", "zoom_min", "zoom_max", "shear", "reflection_probability"});
    auto& a = cfg.augment_ranges;
    read(*r, "rotation_degrees", ranges_where, a.rotation_degrees);
    read(*r, "zoom_min", ranges_where, a.zoom_min);
    read(*r, "zoom_max", ranges_where, a.zoom_max);
    read(*r, "shear", ranges_where, a.shear);
    read(*r, "reflection_probability", ranges_where, a.reflection_probability);
  }
}

nlohmann::ordered_json train_json(const trainer::TrainConfig& c) {
  const auto& a = c.augment_ranges;
  return {{"max_epochs", c.max_epochs},
          {"batch_size", c.batch_size},
          {"learning_rate", c.learning_rate},
          {"dropout", c.dropout},
          {"patience", c.patience},
          {"augment", c.augment},
          {"augment_ranges",
           {{"rotation_degrees", a.rotation_degrees},
            {"zoom_min", a.zoom_min},
            {"zoom_max", a.zoom_max},
            {"shear", a.shear},
            {"reflection_probability", a.reflection_probability}}}};
}

}  // namespace

void ExperimentConfig::validate() const {
  if (corpus.per_class < 1) throw InvalidArgument("corpus.per_class must be at least 1");
  if (corpus.height < 16 || corpus.width < 16) throw InvalidArgument("corpus images must be at least 16x16");
  if (corpus.height != corpus.width) throw InvalidArgument("corpus images must be square");
  if (reserve_per_class >= corpus.per_class) {
    throw InvalidArgument(fmt::format("corpus.reserve_per_class ({}) must be below corpus.per_class ({})",
                                      reserve_per_class, corpus.per_class));
  }
  if (folds < 2) throw InvalidArgument(fmt::format("split.folds must be at least 2, got {}", folds));
  if (corpus.per_class - reserve_per_class < folds) {
    throw InvalidArgument("too few unreserved images per class for the requested fold count");
  }
  featnet.validate();
  train_with.validate();
  train_without.validate();
  nst.validate(featnet::feature_extractor_spec(corpus.height));
  if (architectures.empty()) throw InvalidArgument("train.architectures must not be empty");
  const auto known = trainer::architecture_names();
  for (const auto& a : architectures) {
    if (std::find(known.begin(), known.end(), a) == known.end()) {
      throw InvalidArgument(fmt::format("unknown architecture '{}' (known: {})", a, fmt::join(known, ", ")));
    }
  }
  if (std::set<std::string>(architectures.begin(), architectures.end()).size() != architectures.size()) {
    throw InvalidArgument("train.architectures lists an architecture twice");
  }
}

nlohmann::ordered_json ExperimentConfig::to_json() const {
  nlohmann::ordered_json j;
  j["seed"] = seed;
  j["corpus"] = {{"per_class", corpus.per_class},
                 {"height", corpus.height},
                 {"width", corpus.width},
                 {"reserve_per_class", reserve_per_class}};
  j["featnet"] = train_json(featnet);
  j["nst"] = {{"content_weight", nst.content_weight},
              {"style_weight", nst.style_weight},
              {"content_layer", nst.content_layer},
              {"style_layers", nst.style_layers},
              {"iterations", nst.iterations},
              {"learning_rate", nst.learning_rate},
              {"init", nst.init == nst::InitPolicy::Content ? "content" : "noise"}};
  j["synthesis"] = {{"budget", synthesis_budget}};
  j["pseudo_label"] = {{"balance", pseudo_label_balance}};
  j["split"] = {{"folds", folds}, {"leakage_scope", pipeline::scope_name(leakage_scope)}};
  j["train"] = {{"architectures", architectures},
                {"with_da", train_json(train_with)},
                {"without_da", train_json(train_without)}};
  return j;
}

std::string ExperimentConfig::digest() const { return digest_hex(to_json().dump()); }

ExperimentConfig ExperimentConfig::from_toml(std::string_view text, std::string_view source) {
  toml::table doc;
  try {
    doc = toml::parse(text, source);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << e;
    throw InvalidArgument(msg.str());
  }
  ExperimentConfig cfg;
  reject_unknown(doc, "root",
                 {"root", "seed", "corpus", "featnet", "nst", "synthesis", "pseudo_label", "split", "train"});
  std::string root = cfg.root.string();
  read(doc, "root", "root", root);
  cfg.root = root;
  read(doc, "seed", "root", cfg.seed);

  if (const auto* t = subtable(doc, "corpus", "root")) {
    reject_unknown(*t, "corpus", {"per_class", "height", "width", "reserve_per_class"});
    read(*t, "per_class", "corpus", cfg.corpus.per_class);
    read(*t, "height", "corpus", cfg.corpus.height);
    read(*t, "width", "corpus", cfg.corpus.width);
    read(*t, "reserve_per_class", "corpus", cfg.reserve_per_class);
  }
  read_train(subtable(doc, "featnet", "root"), "featnet", cfg.featnet);
  if (const auto* t = subtable(doc, "nst", "root")) {
    reject_unknown(*t, "nst",
                   {"content_weight", "style_weight", "content_layer", "style_layers", "iterations", "learning_rate",
                    "init"});
    read(*t, "content_weight", "nst", cfg.nst.content_weight);
    read(*t, "style_weight", "nst", cfg.nst.style_weight);
    read(*t, "content_layer", "nst", cfg.nst.content_layer);
    read(*t, "style_layers", "nst", cfg.nst.style_layers);
    read(*t, "iterations", "nst", cfg.nst.iterations);
    read(*t, "learning_rate", "nst", cfg.nst.learning_rate);
    std::string init = "content";
    read(*t, "init", "nst", init);
    if (init == "content") {
      cfg.nst.init = nst::InitPolicy::Content;
    } else if (init == "noise") {
      cfg.nst.init = nst::InitPolicy::Noise;
    } else {
      throw InvalidArgument("nst.init must be 'content' or 'noise', got '" + init + "'");
    }
  }
  if (const auto* t = subtable(doc, "synthesis", "root")) {
    reject_unknown(*t, "synthesis", {"budget"});
    read(*t, "budget", "synthesis", cfg.synthesis_budget);
  }
  if (const auto* t = subtable(doc, "pseudo_label", "root")) {
    reject_unknown(*t, "pseudo_label", {"balance"});
    read(*t, "balance", "pseudo_label", cfg.pseudo_label_balance);
  }
  if (const auto* t = subtable(doc, "split", "root")) {
    reject_unknown(*t, "split", {"folds", "leakage_scope"});
    read(*t, "folds", "split", cfg.folds);
    std::string scope(pipeline::scope_name(cfg.leakage_scope));
    read(*t, "leakage_scope", "split", scope);
    cfg.leakage_scope = pipeline::parse_scope(scope);
  }
  if (const auto* t = subtable(doc, "train", "root")) {
    reject_unknown(*t, "train", {"architectures", "with_da", "without_da"});
    read(*t, "architectures", "train", cfg.architectures);
    read_train(subtable(*t, "with_da", "train"), "train.with_da", cfg.train_with);
    read_train(subtable(*t, "without_da", "train"), "train.without_da", cfg.train_without);
  }
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return from_toml(buf.str(), path.string());
}

void apply_seed_override(ExperimentConfig& config) {
  const char* env = std::getenv("STYLEFORGE_SEED");
  if (env == nullptr || *env == '\0') return;
  char* end = nullptr;
  errno = 0;
  const unsigned long long v = std::strtoull(env, &end, 10);
  if (errno != 0 || end == env || *end != '\0' || *env == '-') {
    throw InvalidArgument(std::string("STYLEFORGE_SEED must be a non-negative integer, got '") + env + "'");
  }
  config.seed = v;
}

}  // namespace styleforge::cli
