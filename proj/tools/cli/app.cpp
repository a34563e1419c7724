#include "app.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <atomic>
#include <fmt/format.h>
#include <fmt/ostream.h>
#include <fstream>
#include <map>
#include <mutex>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>
#include <thread>

#include "styleforge/digest.hpp"
#include "styleforge/featnet/extractor.hpp"
#include "styleforge/featnet/network.hpp"
#include "styleforge/featnet/weights.hpp"
#include "styleforge/pipeline/corpus.hpp"
#include "styleforge/pipeline/manifest.hpp"
#include "styleforge/pipeline/pairs.hpp"
#include "styleforge/pipeline/pseudo_label.hpp"
#include "styleforge/pipeline/synthesis.hpp"
#include "styleforge/rng.hpp"
#include "styleforge/trainer/classifier.hpp"
#include "styleforge/trainer/metrics.hpp"
#include "styleforge/trainer/report.hpp"

namespace styleforge::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using pipeline::DatasetManifest;
using pipeline::Record;

namespace {

// Tags separating the seed streams of the stages.
enum SeedTag : std::uint64_t {
  kCorpusSeed = 0x100,
  kReserveSeed,
  kFeatnetSeed,
  kPairSeed,
  kSplitSeed,
  kTrainSeed,
};

std::uint64_t name_tag(const std::string& name) { return std::stoull(digest_hex(name), nullptr, 16); }

const std::vector<std::string>& regimes() {
  static const std::vector<std::string> r{trainer::kWithoutAugmentation, trainer::kWithAugmentation};
  return r;
}

class Logger {
 public:
  explicit Logger(std::ostream* out) : out_(out) {}
  template <typename... Args>
  void operator()(fmt::format_string<Args...> f, Args&&... args) const {
    if (out_ == nullptr) return;
    std::lock_guard lock(mutex_);
    *out_ << fmt::format(f, std::forward<Args>(args)...) << '\n' << std::flush;
  }

 private:
  std::ostream* out_;
  mutable std::mutex mutex_;
};

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string() + " (has the previous stage run?)");
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("short write to " + path.string());
}

void write_json(const fs::path& path, const ordered_json& j) { write_text(path, j.dump(2) + "\n"); }

ordered_json stamp_of(const ExperimentConfig& cfg) {
  return {{"config_digest", cfg.digest()}, {"seed", cfg.seed}};
}

std::vector<PngText> png_stamp(const ExperimentConfig& cfg) {
  return {{"config_digest", cfg.digest()}, {"seed", std::to_string(cfg.seed)}};
}

fs::path stamp_path(const ExperimentConfig& cfg, std::string_view stage) {
  return cfg.root / ".stamps" / (std::string(stage) + ".json");
}

// True when the stage already ran with this exact configuration.
bool up_to_date(const RunContext& ctx, std::string_view stage, const Logger& log) {
  if (ctx.force_rerun) return false;
  const auto path = stamp_path(ctx.config, stage);
  if (!fs::exists(path)) return false;
  try {
    const auto j = nlohmann::json::parse(read_text(path));
    if (j.at("config_digest").get<std::string>() != ctx.config.digest()) return false;
  } catch (const nlohmann::json::exception&) {
    return false;
  }
  log("[{}] outputs up to date (config {}), skipping; use --force-rerun to redo", stage, ctx.config.digest());
  return true;
}

void mark_done(const RunContext& ctx, std::string_view stage) {
  write_json(stamp_path(ctx.config, stage), stamp_of(ctx.config));
}

void save_manifest(const RunContext& ctx, const DatasetManifest& m, const char* name, ordered_json extra = {}) {
  const fs::path path = ctx.config.root / name;
  m.save(path);
  ordered_json meta = stamp_of(ctx.config);
  meta["records"] = m.size();
  if (extra.is_object()) {
    for (auto& [k, v] : extra.items()) meta[k] = v;
  }
  auto meta_path = path;
  meta_path.replace_extension(".meta.json");
  write_json(meta_path, meta);
}

DatasetManifest load_manifest(const RunContext& ctx, const char* name) {
  return DatasetManifest::load(ctx.config.root / name);
}

std::vector<std::string> reserved_ids(const ExperimentConfig& cfg, const DatasetManifest& real) {
  return pipeline::reserve_pool(real, cfg.reserve_per_class, derive_seed(cfg.seed, kReserveSeed));
}

// Real records that take part in cross-validation.
std::vector<const Record*> fold_records(const ExperimentConfig& cfg, const DatasetManifest& real) {
  const auto reserved = reserved_ids(cfg, real);
  const std::set<std::string> skip(reserved.begin(), reserved.end());
  std::vector<const Record*> out;
  for (const Record* r : real.with_source(pipeline::Source::Real)) {
    if (!skip.contains(r->id)) out.push_back(r);
  }
  return out;
}

std::vector<const Record*> records_for(const DatasetManifest& m, const std::vector<std::string>& ids) {
  std::vector<const Record*> out;
  out.reserve(ids.size());
  for (const auto& id : ids) out.push_back(&m.at(id));
  return out;
}

fs::path model_path(const ExperimentConfig& cfg, const std::string& arch, const std::string& regime, std::size_t f) {
  return cfg.root / files::kModelsDir / arch / regime / fmt::format("fold{}.sfwb", f);
}

fs::path metrics_path(const ExperimentConfig& cfg, const std::string& arch, const std::string& regime,
                      std::size_t f) {
  return cfg.root / files::kMetricsDir / fmt::format("{}.{}.fold{}.json", arch, regime, f);
}

pipeline::FoldPlan load_folds(const RunContext& ctx) {
  return pipeline::FoldPlan::from_json(read_text(ctx.config.root / files::kFolds));
}

// Runs fn(i) for i in [0, n) on up to `jobs` threads; the first exception
// wins and is rethrown after all threads finish.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t jobs, Fn fn) {
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(mutex);
        if (!error) error = std::current_exception();
        next = n;
      }
    }
  };
  const std::size_t threads = std::max<std::size_t>(1, std::min(jobs, n));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace

void gen_data(const RunContext& ctx) {
  const Logger log(ctx.log);
  if (up_to_date(ctx, "gen-data", log)) return;
  const auto& cfg = ctx.config;
  log("[gen-data] rendering {} images per class at {}x{} into {}", cfg.corpus.per_class, cfg.corpus.height,
      cfg.corpus.width, cfg.root.string());
  const auto manifest = pipeline::gen_corpus(cfg.corpus, derive_seed(cfg.seed, kCorpusSeed), cfg.root, png_stamp(cfg));
  save_manifest(ctx, manifest, files::kRealManifest);
  mark_done(ctx, "gen-data");
  log("[gen-data] wrote {} real records", manifest.size());
}

void train_featnet(const RunContext& ctx) {
  const Logger log(ctx.log);
  if (up_to_date(ctx, "train-featnet", log)) return;
  const auto& cfg = ctx.config;
  const auto real = load_manifest(ctx, files::kRealManifest);
  const auto pool = reserved_ids(cfg, real);
  const auto samples = pipeline::load_samples(cfg.root, records_for(real, pool));
  log("[train-featnet] training the feature network on {} reserved images", samples.size());
  auto trained = featnet::train_feature_extractor(samples, featnet::feature_extractor_spec(cfg.corpus.height),
                                                  cfg.featnet, derive_seed(cfg.seed, kFeatnetSeed));
  ordered_json meta = stamp_of(cfg);
  meta["holdout_accuracy"] = trained.holdout_accuracy;
  meta["holdout_size"] = trained.holdout_size;
  meta["epochs_run"] = trained.epochs_run;
  trained.weights.metadata = meta.dump();
  featnet::save_weights(trained.weights, cfg.root / files::kFeatnetWeights);
  mark_done(ctx, "train-featnet");
  log("[train-featnet] holdout accuracy {:.4f} after {} epochs", trained.holdout_accuracy, trained.epochs_run);
}

void synth(const RunContext& ctx) {
  const Logger log(ctx.log);
  if (up_to_date(ctx, "synth", log)) return;
  const auto& cfg = ctx.config;
  const auto real = load_manifest(ctx, files::kRealManifest);
  const auto net = featnet::load_weights(cfg.root / files::kFeatnetWeights);
  // Under the wider scope only the reserved pool may source synthetic images.
  std::vector<std::string> pool;
  if (cfg.leakage_scope == pipeline::LeakageScope::TestAndValidation) pool = reserved_ids(cfg, real);
  const auto plan = pipeline::plan_pairs(real, cfg.synthesis_budget, derive_seed(cfg.seed, kPairSeed), pool);
  log("[synth] {} pairs, {} iterations each, {} jobs", plan.size(), cfg.nst.iterations, ctx.jobs);

  pipeline::SynthesisOptions opts;
  opts.parallelism = ctx.jobs;
  opts.text = png_stamp(cfg);
  const std::size_t step = std::max<std::size_t>(1, plan.size() / 10);
  opts.progress = [&](std::size_t done, std::size_t total) {
    if (done % step == 0 || done == total) log("[synth] {}/{}", done, total);
  };
  const auto batch = pipeline::run_synthesis_batch(plan, real, cfg.root, net, cfg.nst, opts);

  DatasetManifest synthetic;
  for (const auto& r : batch.records) synthetic.append(r);
  ordered_json failures = ordered_json::array();
  for (const auto& f : batch.failures) {
    log("[synth] warning: entry {} ({} x {}) failed: {}", f.plan_index, f.content_id, f.style_id, f.message);
    failures.push_back({{"plan_index", f.plan_index},
                        {"content_id", f.content_id},
                        {"style_id", f.style_id},
                        {"message", f.message}});
  }
  save_manifest(ctx, synthetic, files::kSyntheticManifest,
                {{"nst_digest", cfg.nst.digest()}, {"failures", failures}});
  mark_done(ctx, "synth");
  log("[synth] wrote {} synthetic records ({} failed)", synthetic.size(), batch.failures.size());
}

void pseudo_label(const RunContext& ctx) {
  const Logger log(ctx.log);
  if (up_to_date(ctx, "pseudo-label", log)) return;
  const auto& cfg = ctx.config;
  auto synthetic = load_manifest(ctx, files::kSyntheticManifest);
  const auto net = featnet::load_weights(cfg.root / files::kFeatnetWeights);
  const auto scored = pipeline::pseudo_label_scores(net, synthetic, cfg.root);

  std::vector<double> scores;
  std::vector<std::string> ids;
  ordered_json errors = ordered_json::array();
  for (const auto& s : scored) {
    if (s.score) {
      scores.push_back(*s.score);
      ids.push_back(s.id);
    } else {
      log("[pseudo-label] warning: cannot score {}: {}", s.id, s.error);
      errors.push_back({{"id", s.id}, {"error", s.error}});
    }
  }
  const auto rep = pipeline::assign_pseudo_labels(scores, cfg.pseudo_label_balance);
  if (rep.rule == pipeline::LabelRule::Alternating) {
    log("[pseudo-label] warning: no balancing threshold exists (tied scores); alternating labels by score order");
  }
  ordered_json per_image = ordered_json::array();
  for (std::size_t i = 0; i < ids.size(); ++i) {
    synthetic.set_pseudo_label(ids[i], rep.labels[i], rep.scores[i]);
    per_image.push_back({{"id", ids[i]}, {"score", rep.scores[i]}, {"label", label_name(rep.labels[i])}});
  }
  save_manifest(ctx, synthetic, files::kSyntheticManifest, {{"nst_digest", cfg.nst.digest()}});

  ordered_json out = stamp_of(cfg);
  out["rule"] = pipeline::rule_name(rep.rule);
  out["threshold"] = rep.threshold;
  out["benign"] = rep.benign;
  out["malignant"] = rep.malignant;
  out["images"] = per_image;
  out["errors"] = errors;
  write_json(cfg.root / files::kPseudoLabels, out);
  mark_done(ctx, "pseudo-label");
  log("[pseudo-label] {} rule, threshold {}, {} benign / {} malignant", pipeline::rule_name(rep.rule), rep.threshold,
      rep.benign, rep.malignant);
}

void split(const RunContext& ctx, std::size_t inject_leakage) {
  const Logger log(ctx.log);
  if (inject_leakage == 0 && up_to_date(ctx, "split", log)) return;
  const auto& cfg = ctx.config;
  const auto real = load_manifest(ctx, files::kRealManifest);
  const auto synthetic = load_manifest(ctx, files::kSyntheticManifest);
  const auto eligible = fold_records(cfg, real);
  auto plan = pipeline::split_folds(eligible, synthetic, cfg.folds, derive_seed(cfg.seed, kSplitSeed),
                                    cfg.leakage_scope);
  if (inject_leakage > 0) {
    const auto injected = pipeline::inject_leakage(plan, synthetic, inject_leakage, cfg.seed);
    log("[split] injected {} leaking training entries for the audit", injected.size());
  }
  std::vector<std::string> ids;
  for (const Record* r : eligible) ids.push_back(r->id);
  plan.validate(ids, synthetic);

  const auto violations = pipeline::leakage_check(plan, synthetic);
  if (!violations.empty()) {
    std::string listing;
    for (const auto& v : violations) {
      listing += fmt::format("  fold {}: training image {} was sourced from {}\n", v.fold, v.synthetic_id,
                             v.real_id.empty() ? "<unknown>" : v.real_id);
    }
    throw LeakageDetected(violations, fmt::format("leakage audit failed with {} violation(s) ({} scope):\n{}",
                                                  violations.size(), pipeline::scope_name(plan.scope), listing));
  }
  auto j = ordered_json::parse(plan.to_json());
  ordered_json out = stamp_of(cfg);
  for (auto& [k, v] : j.items()) out[k] = v;
  write_json(cfg.root / files::kFolds, out);
  mark_done(ctx, "split");
  for (std::size_t f = 0; f < plan.folds.size(); ++f) {
    log("[split] fold {}: {} test, {} validation, {} training", f, plan.folds[f].test.size(),
        plan.folds[f].validation.size(), plan.folds[f].training.size());
  }
}

void train(const RunContext& ctx) {
  const Logger log(ctx.log);
  if (up_to_date(ctx, "train", log)) return;
  const auto& cfg = ctx.config;
  const auto real = load_manifest(ctx, files::kRealManifest);
  const auto synthetic = load_manifest(ctx, files::kSyntheticManifest);
  const auto plan = load_folds(ctx);
  if (plan.k != cfg.folds) {
    throw InvalidArgument(fmt::format("folds.json has {} folds but the config asks for {}", plan.k, cfg.folds));
  }
  const auto reserve = pipeline::load_samples(cfg.root, records_for(real, reserved_ids(cfg, real)));

  struct Task {
    std::size_t arch, regime, fold;
  };
  std::vector<Task> tasks;
  for (std::size_t a = 0; a < cfg.architectures.size(); ++a) {
    for (std::size_t r = 0; r < regimes().size(); ++r) {
      for (std::size_t f = 0; f < plan.k; ++f) tasks.push_back({a, r, f});
    }
  }
  log("[train] {} runs on {} jobs", tasks.size(), ctx.jobs);
  parallel_for(tasks.size(), ctx.jobs, [&](std::size_t i) {
    const Task& t = tasks[i];
    const std::string& arch = cfg.architectures[t.arch];
    const std::string& regime = regimes()[t.regime];
    const auto& fold = plan.folds[t.fold];
    const auto validation = pipeline::load_samples(cfg.root, records_for(real, fold.validation));
    const bool with_da = regime == trainer::kWithAugmentation;
    auto tc = with_da ? cfg.train_with : cfg.train_without;
    // The seed does not depend on the architecture's position in the list.
    tc.seed = derive_seed(cfg.seed, kTrainSeed ^ name_tag(arch), t.regime * 1000 + t.fold);
    const auto train_set =
        with_da ? pipeline::load_samples(cfg.root, records_for(synthetic, fold.training)) : reserve;

    auto trained = trainer::train_classifier(arch, train_set, validation, tc);
    trained.metrics.regime = regime;
    trained.metrics.fold = t.fold;

    ordered_json meta = stamp_of(cfg);
    meta["architecture"] = arch;
    meta["regime"] = regime;
    meta["fold"] = t.fold;
    trained.model.weights.metadata = meta.dump();
    const auto mpath = model_path(cfg, arch, regime, t.fold);
    fs::create_directories(mpath.parent_path());
    featnet::save_weights(trained.model.weights, mpath);

    ordered_json m = stamp_of(cfg);
    m["leakage_scope"] = pipeline::scope_name(plan.scope);
    m["train_size"] = train_set.size();
    m["metrics"] = trained.metrics;
    write_json(metrics_path(cfg, arch, regime, t.fold), m);
    log("[train] {} {} fold {}: validation AUC {:.4f}, best epoch {} of {}", arch, regime, t.fold,
        trained.metrics.validation_auc, trained.metrics.best_epoch, trained.metrics.epochs_run);
  });
  mark_done(ctx, "train");
}

void evaluate(const RunContext& ctx) {
  const Logger log(ctx.log);
  if (up_to_date(ctx, "evaluate", log)) return;
  const auto& cfg = ctx.config;
  const auto real = load_manifest(ctx, files::kRealManifest);
  const auto plan = load_folds(ctx);
  for (const auto& arch : cfg.architectures) {
    for (const auto& regime : regimes()) {
      for (std::size_t f = 0; f < plan.k; ++f) {
        const auto mpath = metrics_path(cfg, arch, regime, f);
        auto j = ordered_json::parse(read_text(mpath));
        auto metrics = j.at("metrics").get<trainer::Metrics>();
        trainer::ClassifierModel model{arch, featnet::load_weights(model_path(cfg, arch, regime, f))};
        const auto test = pipeline::load_samples(cfg.root, records_for(real, plan.folds[f].test));
        std::vector<Image> images;
        images.reserve(test.size());
        for (const auto& s : test) images.push_back(s.image);
        const auto scores = trainer::predict_scores(model, images);
        const auto labels = trainer::label_vector(test);
        metrics.test_auc = trainer::auc(scores, labels);
        metrics.test_accuracy = trainer::accuracy(scores, labels);
        metrics.evaluated = true;
        j["config_digest"] = cfg.digest();
        j["seed"] = cfg.seed;
        j["metrics"] = metrics;
        write_json(mpath, j);
        log("[evaluate] {} {} fold {}: test AUC {:.4f}, accuracy {:.4f}", arch, regime, f, metrics.test_auc,
            metrics.test_accuracy);
      }
    }
  }
  mark_done(ctx, "evaluate");
}

std::string report(const RunContext& ctx, const std::vector<fs::path>& metrics) {
  const Logger log(ctx.log);
  const auto& cfg = ctx.config;
  std::vector<fs::path> paths = metrics;
  if (paths.empty()) {
    const auto dir = cfg.root / files::kMetricsDir;
    if (!fs::is_directory(dir)) throw IoError("no metrics directory at " + dir.string() + " (run train first)");
    for (const auto& e : fs::directory_iterator(dir)) {
      if (e.path().extension() == ".json") paths.push_back(e.path());
    }
    std::sort(paths.begin(), paths.end());
  }
  if (paths.empty()) throw InvalidArgument("report needs at least one metrics file");

  std::string digest, scope;
  std::uint64_t seed = 0;
  // (architecture, regime) -> fold -> test AUC, in first-seen order.
  std::vector<std::pair<std::string, std::string>> order;
  std::map<std::pair<std::string, std::string>, std::map<std::size_t, double>> cells;
  for (const auto& p : paths) {
    const auto j = nlohmann::json::parse(read_text(p));
    const auto m = j.at("metrics").get<trainer::Metrics>();
    if (!m.evaluated) throw InvalidArgument(p.string() + " has not been evaluated on its test fold");
    const auto file_digest = j.at("config_digest").get<std::string>();
    if (digest.empty()) {
      digest = file_digest;
      seed = j.at("seed").get<std::uint64_t>();
      scope = j.value("leakage_scope", std::string("test"));
    } else if (digest != file_digest) {
      throw InvalidArgument(fmt::format("{} comes from config {}, others from {}", p.string(), file_digest, digest));
    }
    const auto key = std::make_pair(m.architecture, m.regime);
    if (!cells.contains(key)) order.push_back(key);
    if (!cells[key].emplace(m.fold, m.test_auc).second) {
      throw InvalidArgument(fmt::format("fold {} of {} {} appears twice", m.fold, m.architecture, m.regime));
    }
  }
  std::vector<trainer::ResultRow> rows;
  for (const auto& key : order) {
    trainer::ResultRow row{key.first, key.second, {}, 0.0};
    std::size_t expect = 0;
    for (const auto& [fold, value] : cells[key]) {
      if (fold != expect++) throw InvalidArgument(fmt::format("{} {} is missing fold {}", key.first, key.second, expect - 1));
      row.folds.push_back(value);
    }
    rows.push_back(std::move(row));
  }
  const auto rep = trainer::aggregate_results(std::move(rows));

  std::string text = fmt::format(
      "config digest: {}\nseed: {}\nleakage scope: {}\nmetric: AUC on each fold's real test set\n\n{}", digest, seed,
      scope, trainer::render_table(rep));
  write_text(cfg.root / files::kReportText, text);
  ordered_json j;
  j["config_digest"] = digest;
  j["seed"] = seed;
  j["leakage_scope"] = scope;
  j["metric"] = "test_auc";
  const auto table = trainer::report_to_json(rep);
  for (const auto& [k, v] : table.items()) j[k] = v;
  write_json(cfg.root / files::kReportJson, j);
  log("[report] wrote {} and {}", (cfg.root / files::kReportText).string(), (cfg.root / files::kReportJson).string());
  return text;
}

std::string run_all(const RunContext& ctx) {
  gen_data(ctx);
  train_featnet(ctx);
  synth(ctx);
  pseudo_label(ctx);
  split(ctx);
  train(ctx);
  evaluate(ctx);
  return report(ctx);
}

int run_subcommand(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"styleforge: neural style transfer as data augmentation, end to end"};
  app.require_subcommand(1, 1);

  std::string config_path, root;
  std::optional<std::uint64_t> seed;
  bool force = false, quiet = false;
  std::size_t jobs = std::max(1u, std::thread::hardware_concurrency());
  std::optional<std::size_t> per_class, size, budget;
  std::size_t inject = 0;
  std::vector<std::string> architectures, metrics_files;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "Experiment config (TOML)");
    sub->add_option("--root", root, "Dataset root, overrides the config");
    sub->add_option("--seed", seed, "Global seed, overrides the config and STYLEFORGE_SEED");
    sub->add_flag("--force-rerun", force, "Redo stages whose outputs are up to date");
    sub->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_flag("--quiet", quiet, "No progress messages");
    return sub;
  };
  auto* gen = common(app.add_subcommand("gen-data", "Render the procedural two-class corpus"));
  gen->add_option("--per-class", per_class, "Images per class")->check(CLI::PositiveNumber);
  gen->add_option("--size", size, "Image height and width")->check(CLI::Range(16, 4096));
  common(app.add_subcommand("train-featnet", "Train the feature network on the reserved real pool"));
  auto* syn = common(app.add_subcommand("synth", "Synthesize benign-content x malignant-style images"));
  syn->add_option("--budget", budget, "Number of synthesized images");
  common(app.add_subcommand("pseudo-label", "Score and label the synthesized images"));
  auto* spl = common(app.add_subcommand("split", "Build and audit the cross-validation folds"));
  spl->add_option("--inject-leakage", inject, "Add N leaking training entries before the audit (self-test)");
  auto* trn = common(app.add_subcommand("train", "Train classifiers for every fold and regime"));
  trn->add_option("--architecture", architectures, "Restrict to these architectures");
  common(app.add_subcommand("evaluate", "Score every trained classifier on its test fold"));
  auto* rep = common(app.add_subcommand("report", "Aggregate metrics into the results table"));
  rep->add_option("--metrics", metrics_files, "Metrics files (default: the metrics directory)");
  common(app.add_subcommand("run-all", "Run every stage in order"));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kUsageError;
  }
  CLI::App* sub = app.get_subcommands().front();
  const std::string name = sub->get_name();

  try {
    RunContext ctx;
    ctx.config = config_path.empty() ? ExperimentConfig{} : ExperimentConfig::load(config_path);
    apply_seed_override(ctx.config);
    if (seed) ctx.config.seed = *seed;
    if (!root.empty()) ctx.config.root = root;
    if (per_class) ctx.config.corpus.per_class = *per_class;
    if (size) ctx.config.corpus.height = ctx.config.corpus.width = *size;
    if (budget) ctx.config.synthesis_budget = *budget;
    if (!architectures.empty()) ctx.config.architectures = architectures;
    if (per_class && ctx.config.reserve_per_class >= *per_class) {
      // Keep the default reserve valid for small corpora.
      ctx.config.reserve_per_class = *per_class / 5;
    }
    ctx.config.validate();
    ctx.force_rerun = force;
    ctx.jobs = jobs;
    ctx.log = quiet ? nullptr : &err;

    if (name == "gen-data") {
      gen_data(ctx);
    } else if (name == "train-featnet") {
      train_featnet(ctx);
    } else if (name == "synth") {
      synth(ctx);
    } else if (name == "pseudo-label") {
      pseudo_label(ctx);
    } else if (name == "split") {
      split(ctx, inject);
    } else if (name == "train") {
      train(ctx);
    } else if (name == "evaluate") {
      evaluate(ctx);
    } else if (name == "report") {
      std::vector<fs::path> paths(metrics_files.begin(), metrics_files.end());
      out << report(ctx, paths);
    } else if (name == "run-all") {
      out << run_all(ctx);
    }
    return kSuccess;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  }
}

}  // namespace styleforge::cli
