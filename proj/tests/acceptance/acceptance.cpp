// Runs the ten acceptance criteria and prints one PASS/FAIL line for each.
// Usage: acceptance [criterion numbers...]   (default: all)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <nlohmann/json.hpp>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "app.hpp"
#include "config.hpp"
#include "fixtures.hpp"
#include "gradcheck.hpp"
#include "oracles.hpp"
#include "reference_results.hpp"
#include "styleforge/featnet/weights.hpp"
#include "styleforge/image.hpp"
#include "styleforge/nst/style_transfer.hpp"
#include "styleforge/pipeline/folds.hpp"
#include "styleforge/pipeline/manifest.hpp"
#include "styleforge/pipeline/pairs.hpp"
#include "styleforge/pipeline/pseudo_label.hpp"
#include "styleforge/pipeline/synthesis.hpp"
#include "styleforge/trainer/metrics.hpp"
#include "styleforge/trainer/report.hpp"

namespace sf = styleforge;
namespace fs = std::filesystem;
using sf::ad::Tensor;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt_double(double v, int precision = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", precision, v);
  return buf;
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

// The desk experiment shared by criteria 2, 3, 9 and 10. Roots are created
// lazily; `primary` gets its feature network trained on first use.
class Desk {
 public:
  Desk() : config_(sf::cli::ExperimentConfig::load(fs::path(STYLEFORGE_CONFIG_DIR) / "desk.toml")) {
    sf::cli::apply_seed_override(config_);
  }

  const sf::cli::ExperimentConfig& config() const { return config_; }

  sf::cli::RunContext context(const fs::path& root) const {
    sf::cli::RunContext ctx;
    ctx.config = config_;
    ctx.config.root = root;
    ctx.jobs = std::max(1u, std::thread::hardware_concurrency());
    ctx.log = &std::cerr;
    return ctx;
  }

  const fs::path& primary() {
    const auto ctx = context(primary_.path());
    sf::cli::gen_data(ctx);
    sf::cli::train_featnet(ctx);
    return primary_.path();
  }
  const fs::path& secondary() const { return secondary_.path(); }

  sf::pipeline::DatasetManifest real() {
    return sf::pipeline::DatasetManifest::load(primary() / sf::cli::files::kRealManifest);
  }
  sf::featnet::WeightBundle featnet() { return sf::featnet::load_weights(primary() / sf::cli::files::kFeatnetWeights); }

 private:
  sf::cli::ExperimentConfig config_;
  sf::testing::TempDir primary_{"styleforge-accept-a"};
  sf::testing::TempDir secondary_{"styleforge-accept-b"};
};

// ------------------------------------------------------------------ criteria

Outcome gradient_suite() {
  const Stopwatch clock;
  const auto cases = sf::gradcheck::run_suite(50);
  const double seconds = clock.seconds();
  double worst = 0.0;
  std::string worst_case;
  std::size_t coordinates = 0, kinks = 0;
  for (const auto& c : cases) {
    coordinates += c.coordinates;
    kinks += c.kinks;
    if (!std::isfinite(c.worst) || c.worst >= worst) {
      worst = std::isfinite(c.worst) ? c.worst : INFINITY;
      worst_case = c.name;
    }
  }
  // Stencils across a relu or pooling kink carry no derivative information;
  // they are excluded and must stay rare.
  const bool pass = worst <= 1e-4 && kinks * 100 <= coordinates && seconds < 60.0;
  return {pass, std::to_string(cases.size()) + " cases x 50 seeds, worst relative error " + fmt_double(worst, 3) +
                    " (" + worst_case + "), " + std::to_string(kinks) + "/" + std::to_string(coordinates) +
                    " coordinates at kinks, " + fmt_double(seconds, 3) + " s"};
}

Outcome nst_fixpoint(Desk& desk) {
  const auto net = desk.featnet();
  const auto real = desk.real();
  const sf::nst::StyleTransferConfig cfg;
  std::size_t checked = 0, ok = 0;
  for (const auto& r : real.records()) {
    if (checked == 10) break;
    ++checked;
    const sf::Image image = sf::read_png(desk.primary() / r.path);
    const auto targets = sf::nst::compute_targets(net, image, image, cfg);
    const Tensor g = sf::nst::pixel_gradient(net, image, targets, cfg);
    const bool zero = std::all_of(g.data().begin(), g.data().end(), [](double v) { return v == 0.0; });
    const auto result = sf::nst::synthesize(image, image, net, cfg, checked);
    if (zero && result.image == image) ++ok;
  }
  return {ok == checked && checked == 10,
          std::to_string(ok) + "/" + std::to_string(checked) + " corpus images with zero gradient and identical output"};
}

Outcome nst_progress(Desk& desk) {
  const auto net = desk.featnet();
  const auto real = desk.real();
  const sf::nst::StyleTransferConfig cfg;  // 200 iterations, w_c 0.025, w_s 1.0
  const auto plan = sf::pipeline::plan_pairs(real, 20, 2024);
  const Stopwatch clock;
  std::size_t ok = 0;
  double worst_ratio = 0.0;
  for (const auto& e : plan.entries) {
    const sf::Image content = sf::read_png(desk.primary() / real.at(e.content_id).path);
    const sf::Image style = sf::read_png(desk.primary() / real.at(e.style_id).path);
    const auto result = sf::nst::synthesize(content, style, net, cfg, e.seed);
    const auto& initial = result.trace.front();
    const double ratio = result.final_loss.total / initial.total;
    worst_ratio = std::max(worst_ratio, ratio);
    if (ratio <= 0.5 && result.final_loss.style < initial.style) ++ok;
  }
  const double seconds = clock.seconds();
  return {ok >= 18 && seconds < 300.0, std::to_string(ok) + "/20 pairs halve the loss and move towards the style, " +
                                           "worst final/initial " + fmt_double(worst_ratio, 3) + ", " +
                                           fmt_double(seconds, 3) + " s"};
}

Outcome gram_properties() {
  sf::Rng rng(0x9a3);
  double asym = 0.0, min_eig = INFINITY, oracle_gap = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t h = 1 + rng.below(8), w = 1 + rng.below(8), c = 1 + rng.below(16);
    const Tensor a = sf::oracle::random_tensor({h, w, c}, rng, -2.0, 2.0);
    const Tensor g = sf::nst::gram_matrix(a).values;
    const Tensor expected = sf::oracle::gram(a);
    for (std::size_t i = 0; i < c; ++i) {
      for (std::size_t j = 0; j < c; ++j) {
        asym = std::max(asym, std::abs(g[i * c + j] - g[j * c + i]));
        oracle_gap = std::max(oracle_gap, std::abs(g[i * c + j] - expected[i * c + j]));
      }
    }
    min_eig = std::min(min_eig, sf::oracle::min_eigenvalue(g));
  }
  return {asym <= 1e-12 && min_eig >= -1e-10 && oracle_gap <= 1e-12,
          "1000 activations, max asymmetry " + fmt_double(asym, 3) + ", min eigenvalue " + fmt_double(min_eig, 3) +
              ", max gap to oracle " + fmt_double(oracle_gap, 3)};
}

Outcome auc_oracle() {
  const std::vector<double> scores = {0.1, 0.4, 0.35, 0.8};
  const std::vector<int> labels = {0, 0, 1, 1};
  const double example = sf::trainer::auc(scores, labels);
  sf::Rng rng(0x5a1);
  double gap = 0.0;
  std::size_t tied_sets = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    // Six score levels and at least seven scores force ties in every other set.
    const bool coarse = trial % 2 == 0;
    const std::size_t n = (coarse ? 7 : 2) + rng.below(194);
    std::vector<double> s(n);
    std::vector<int> l(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = coarse ? static_cast<double>(rng.below(6)) / 5.0 : rng.uniform();
      l[i] = static_cast<int>(rng.below(2));
    }
    l[0] = 0;
    l[1] = 1;
    std::set<double> distinct(s.begin(), s.end());
    if (distinct.size() < n) ++tied_sets;
    gap = std::max(gap, std::abs(sf::trainer::auc(s, l) - sf::oracle::pairwise_auc(s, l)));
  }
  return {example == 0.75 && gap <= 1e-12 && tied_sets >= 500,
          "worked example " + fmt_double(example) + ", 1000 sets (" + std::to_string(tied_sets) +
              " with ties), max gap to pairwise oracle " + fmt_double(gap, 3)};
}

Outcome reference_arithmetic() {
  const auto refs = sf::testing::reference_results();
  std::vector<sf::trainer::ResultRow> rows;
  for (const auto& r : refs) rows.push_back(r.row);
  const auto rep = sf::trainer::aggregate_results(rows);
  std::size_t matched = 0;
  for (std::size_t i = 0; i < refs.size(); ++i) {
    if (std::round(rep.rows[i].average * 1000.0) / 1000.0 == refs[i].printed_average) ++matched;
  }
  const bool improvement = rep.has_improvement &&
                           std::abs(rep.improvement - sf::testing::kReferenceImprovement) <= 1e-12 &&
                           std::abs(rep.mean_with - sf::testing::kReferenceMeanWith) <= 1e-12 &&
                           std::abs(rep.mean_without - sf::testing::kReferenceMeanWithout) <= 1e-12;
  return {matched == refs.size() && improvement, std::to_string(matched) + "/8 averages match to three decimals, " +
                                                     "improvement " + fmt_double(rep.improvement, 6)};
}

Outcome balancing_threshold() {
  sf::Rng rng(0xba1);
  std::size_t ok = 0, agree = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + rng.below(299);
    std::vector<double> s(n);
    for (auto& v : s) v = rng.uniform();
    try {
      const auto rep = sf::pipeline::balance_threshold(s);
      const auto above = static_cast<std::size_t>(
          std::count_if(s.begin(), s.end(), [&](double v) { return v >= rep.threshold; }));
      const std::size_t diff = std::max(rep.benign, rep.malignant) - std::min(rep.benign, rep.malignant);
      if (above == rep.malignant && rep.benign + rep.malignant == n && diff <= 1) ++ok;
      if (diff == sf::oracle::best_sweep_imbalance(s)) ++agree;
    } catch (const sf::pipeline::NoBalancingThreshold&) {
    }
  }
  // Heavily tied sets: a threshold exists exactly when the sweep finds one.
  std::size_t tied_agree = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + rng.below(40);
    std::vector<double> s(n);
    for (auto& v : s) v = static_cast<double>(rng.below(4)) / 3.0;
    const bool exists = sf::oracle::best_sweep_imbalance(s) <= 1;
    bool found = false;
    try {
      const auto rep = sf::pipeline::balance_threshold(s);
      found = std::max(rep.benign, rep.malignant) - std::min(rep.benign, rep.malignant) <= 1;
    } catch (const sf::pipeline::NoBalancingThreshold&) {
    }
    if (found == exists) ++tied_agree;
  }
  return {ok == 1000 && agree == 1000 && tied_agree == 1000,
          std::to_string(ok) + "/1000 balanced, " + std::to_string(agree) + "/1000 equal to the sweep optimum, " +
              std::to_string(tied_agree) + "/1000 tied sets agree with the sweep"};
}

sf::pipeline::DatasetManifest id_manifest(std::size_t per_class) {
  sf::pipeline::DatasetManifest m;
  for (const auto label : {sf::Label::Benign, sf::Label::Malignant}) {
    for (std::size_t i = 0; i < per_class; ++i) {
      sf::pipeline::Record r;
      r.id = std::string(label == sf::Label::Benign ? "b" : "m") + std::to_string(i);
      r.path = "real/" + r.id + ".png";
      r.label = label;
      m.append(r);
    }
  }
  return m;
}

sf::pipeline::DatasetManifest synthetic_pairs(const sf::pipeline::DatasetManifest& real, std::size_t budget,
                                              std::uint64_t seed) {
  sf::pipeline::DatasetManifest syn;
  const auto plan = sf::pipeline::plan_pairs(real, budget, seed);
  for (std::size_t i = 0; i < plan.size(); ++i) {
    sf::pipeline::Record r;
    r.id = sf::pipeline::synthetic_id(i);
    r.path = "synthetic/" + r.id + ".png";
    r.source = sf::pipeline::Source::Synthetic;
    r.provenance = sf::pipeline::SourcePair{plan.entries[i].content_id, plan.entries[i].style_id, plan.entries[i].seed};
    r.pseudo_label = i % 2 ? sf::Label::Malignant : sf::Label::Benign;
    r.score = 0.5;
    syn.append(r);
  }
  return syn;
}

Outcome leakage_audit() {
  sf::Rng rng(0x1ea);
  std::size_t splits = 0, clean = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const std::size_t per_class = 6 + rng.below(40);
    const std::size_t k = 2 + rng.below(5);
    const auto real = id_manifest(per_class);
    const auto syn = synthetic_pairs(real, per_class * per_class / 2, seed);
    const auto plan = sf::pipeline::split_folds(real.with_source(sf::pipeline::Source::Real), syn, k, seed);
    ++splits;
    if (sf::pipeline::leakage_check(plan, syn).empty()) ++clean;
  }
  std::size_t injected = 0, detected = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto real = id_manifest(20);
    const auto syn = synthetic_pairs(real, 400, seed);
    auto plan = sf::pipeline::split_folds(real.with_source(sf::pipeline::Source::Real), syn, 5, seed);
    const auto leaks = sf::pipeline::inject_leakage(plan, syn, 100, seed + 1);
    std::set<std::pair<std::size_t, std::string>> found;
    for (const auto& v : sf::pipeline::leakage_check(plan, syn)) found.insert({v.fold, v.synthetic_id});
    injected += leaks.size();
    for (const auto& l : leaks) detected += found.contains({l.fold, l.synthetic_id}) ? 1 : 0;
  }
  return {clean == splits && injected == 1000 && detected == injected,
          std::to_string(clean) + "/" + std::to_string(splits) + " splits clean, " + std::to_string(detected) + "/" +
              std::to_string(injected) + " injected violations detected (10 rounds of 100)"};
}

Outcome desk_experiment(Desk& desk) {
  Stopwatch first;
  desk.primary();
  sf::cli::run_all(desk.context(desk.primary()));
  const double first_seconds = first.seconds();
  Stopwatch second;
  sf::cli::run_all(desk.context(desk.secondary()));
  const double second_seconds = second.seconds();

  const auto report =
      nlohmann::json::parse(sf::testing::read_text(desk.primary() / sf::cli::files::kReportJson));
  const double with = report.at("mean_with").get<double>();
  const double without = report.at("mean_without").get<double>();
  const bool identical = sf::testing::snapshot(desk.primary()) == sf::testing::snapshot(desk.secondary());
  const bool a = with >= 0.80;
  const bool b = with >= without - 0.02;
  const bool fast = std::max(first_seconds, second_seconds) < 900.0;
  return {a && b && identical && fast,
          "mean test AUC with DA " + fmt_double(with) + " (>= 0.80 " + (a ? "ok" : "FAILED") + "), without DA " +
              fmt_double(without) + " (gap " + (b ? "ok" : "FAILED") + "), re-run " +
              (identical ? "bit-identical" : "DIFFERS") + ", " + fmt_double(first_seconds, 3) + " s + " +
              fmt_double(second_seconds, 3) + " s"};
}

Outcome parallelism_invariance(Desk& desk) {
  const auto net = desk.featnet();
  const auto real = desk.real();
  const auto plan = sf::pipeline::plan_pairs(real, 8, 31);
  // A second corpus generated from the same config stands in for a fresh root.
  sf::testing::TempDir other("styleforge-accept-c");
  sf::cli::gen_data(desk.context(other.path()));

  const auto run = [&](const fs::path& root, std::size_t parallelism) {
    sf::pipeline::SynthesisOptions opts;
    opts.parallelism = parallelism;
    opts.subdir = "parallelism_check";
    const auto batch = sf::pipeline::run_synthesis_batch(plan, real, root, net, desk.config().nst, opts);
    sf::pipeline::DatasetManifest m;
    for (const auto& r : batch.records) m.append(r);
    return std::make_pair(m.to_jsonl(), sf::testing::snapshot(root / opts.subdir));
  };
  const auto serial = run(desk.primary(), 1);
  const auto parallel = run(other.path(), 4);
  const bool manifests = serial.first == parallel.first;
  const bool images = serial.second == parallel.second && serial.second.size() == 8;
  return {manifests && images, std::to_string(serial.second.size()) + " images " +
                                   (images ? "byte-identical" : "DIFFER") + ", manifests " +
                                   (manifests ? "identical" : "DIFFER")};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  const auto wanted = [&](int n) { return selected.empty() || selected.contains(n); };

  const std::map<int, std::string> names = {
      {1, "gradient suite"},          {2, "style transfer fixpoint"}, {3, "style transfer progress"},
      {4, "gram properties"},         {5, "auc oracle"},              {6, "reference result arithmetic"},
      {7, "balancing threshold"},     {8, "leakage audit"},           {9, "end-to-end desk experiment"},
      {10, "parallelism invariance"},
  };
  std::unique_ptr<Desk> desk;
  const auto need_desk = [&]() -> Desk& {
    if (!desk) desk = std::make_unique<Desk>();
    return *desk;
  };
  const std::map<int, std::function<Outcome()>> checks = {
      {1, gradient_suite},
      {2, [&] { return nst_fixpoint(need_desk()); }},
      {3, [&] { return nst_progress(need_desk()); }},
      {4, gram_properties},
      {5, auc_oracle},
      {6, reference_arithmetic},
      {7, balancing_threshold},
      {8, leakage_audit},
      {9, [&] { return desk_experiment(need_desk()); }},
      {10, [&] { return parallelism_invariance(need_desk()); }},
  };
  // The end-to-end run goes before the checks that reuse its dataset root.
  const std::vector<int> order = {1, 4, 5, 6, 7, 8, 9, 2, 3, 10};

  std::map<int, std::pair<Outcome, double>> results;
  for (int n : order) {
    if (!wanted(n)) continue;
    std::cerr << "== criterion " << n << ": " << names.at(n) << "\n";
    const Stopwatch clock;
    Outcome outcome;
    try {
      outcome = checks.at(n)();
    } catch (const std::exception& e) {
      outcome = {false, std::string("threw: ") + e.what()};
    }
    results[n] = {outcome, clock.seconds()};
    std::cerr << "   " << (outcome.pass ? "PASS" : "FAIL") << " " << outcome.detail << "\n";
  }

  std::size_t passed = 0;
  for (const auto& [n, result] : results) {
    const auto& [outcome, seconds] = result;
    passed += outcome.pass ? 1 : 0;
    std::printf("[%s] criterion %2d  %-28s %s (%.1f s)\n", outcome.pass ? "PASS" : "FAIL", n, names.at(n).c_str(),
                outcome.detail.c_str(), seconds);
  }
  std::printf("%zu/%zu criteria passed\n", passed, results.size());
  return passed == results.size() ? EXIT_SUCCESS : EXIT_FAILURE;
}
