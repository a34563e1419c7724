#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "styleforge/featnet/model.hpp"
#include "styleforge/featnet/network.hpp"
#include "styleforge/featnet/weights.hpp"
#include "styleforge/pipeline/corpus.hpp"
#include "styleforge/pipeline/folds.hpp"
#include "styleforge/pipeline/manifest.hpp"
#include "styleforge/pipeline/pairs.hpp"
#include "styleforge/pipeline/pseudo_label.hpp"

namespace styleforge::pipeline {
namespace {

Record real_record(const std::string& id, Label label) {
  Record r;
  r.id = id;
  r.path = "real/" + id + ".png";
  r.label = label;
  return r;
}

Record synthetic_record(const std::string& id, const std::string& content, const std::string& style,
                        std::optional<Label> pseudo = Label::Malignant) {
  Record r;
  r.id = id;
  r.path = "synthetic/" + id + ".png";
  r.source = Source::Synthetic;
  r.provenance = SourcePair{content, style, 1};
  if (pseudo) {
    r.pseudo_label = pseudo;
    r.score = 0.7;
  }
  return r;
}

// n benign ids b0.. and n malignant ids m0..
DatasetManifest real_manifest(std::size_t per_class) {
  DatasetManifest m;
  for (std::size_t i = 0; i < per_class; ++i) m.append(real_record("b" + std::to_string(i), Label::Benign));
  for (std::size_t i = 0; i < per_class; ++i) m.append(real_record("m" + std::to_string(i), Label::Malignant));
  return m;
}

// One synthetic image for every (benign, malignant) pair of the manifest.
DatasetManifest all_pairs(const DatasetManifest& real) {
  DatasetManifest s;
  std::size_t n = 0;
  for (const Record* c : real.real_with_label(Label::Benign)) {
    for (const Record* st : real.real_with_label(Label::Malignant)) {
      s.append(synthetic_record("s" + std::to_string(n++), c->id, st->id));
    }
  }
  return s;
}

std::size_t count_at_or_above(const PseudoLabelReport& rep) {
  std::size_t n = 0;
  for (double s : rep.scores) n += s >= rep.threshold ? 1 : 0;
  return n;
}

// ---------------------------------------------------------------- manifest

TEST(Manifest, RejectsDuplicateIds) {
  DatasetManifest m;
  m.append(real_record("a", Label::Benign));
  EXPECT_THROW(m.append(real_record("a", Label::Malignant)), InvalidArgument);
}

TEST(Manifest, EnforcesRealAndSyntheticFieldRules) {
  DatasetManifest m;
  Record unlabeled = real_record("a", Label::Benign);
  unlabeled.label.reset();
  EXPECT_THROW(m.append(unlabeled), InvalidArgument);
  Record with_provenance = real_record("b", Label::Benign);
  with_provenance.provenance = SourcePair{"x", "y", 0};
  EXPECT_THROW(m.append(with_provenance), InvalidArgument);
  Record orphan = synthetic_record("c", "x", "y");
  orphan.provenance.reset();
  EXPECT_THROW(m.append(orphan), InvalidArgument);
  Record labeled = synthetic_record("d", "x", "y");
  labeled.label = Label::Benign;
  EXPECT_THROW(m.append(labeled), InvalidArgument);
  EXPECT_TRUE(m.empty());
}

TEST(Manifest, PseudoLabelsNeverTouchRealRecords) {
  DatasetManifest m;
  m.append(real_record("a", Label::Benign));
  m.append(synthetic_record("s", "a", "z", std::nullopt));
  EXPECT_THROW(m.set_pseudo_label("a", Label::Malignant, 0.9), InvalidArgument);
  EXPECT_EQ(m.at("a").label, Label::Benign);
  m.set_pseudo_label("s", Label::Benign, 0.1);
  EXPECT_EQ(m.at("s").training_label(), Label::Benign);
  EXPECT_EQ(m.at("s").score, 0.1);
}

TEST(Manifest, JsonLinesRoundTrip) {
  DatasetManifest m = real_manifest(2);
  m.append(synthetic_record("s0", "b0", "m1"));
  m.append(synthetic_record("s1", "b1", "m0", std::nullopt));
  const std::string text = m.to_jsonl();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 6);
  EXPECT_EQ(text.rfind("{\"id\":\"b0\",\"path\":", 0), 0u) << text;
  const auto back = DatasetManifest::from_jsonl(text);
  EXPECT_EQ(back.records(), m.records());
  EXPECT_EQ(back.to_jsonl(), text);
}

TEST(Manifest, SaveAndLoad) {
  testing::TempDir dir;
  const auto m = real_manifest(3);
  m.save(dir / "m.jsonl");
  EXPECT_EQ(DatasetManifest::load(dir / "m.jsonl").records(), m.records());
}

TEST(Manifest, MalformedLineIsReported) {
  try {
    DatasetManifest::from_jsonl("{\"id\":\"a\",\"path\":\"p\",\"source\":\"real\",\"label\":\"benign\"}\nnot json\n");
    FAIL() << "expected InvalidArgument";
  } catch (const InvalidArgument& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
}

TEST(Manifest, LoadSamplesNeedsLabels) {
  DatasetManifest m;
  m.append(synthetic_record("s", "a", "b", std::nullopt));
  EXPECT_THROW(load_samples("/nonexistent", m.with_source(Source::Synthetic)), InvalidArgument);
}

// ------------------------------------------------------------------ corpus

TEST(Corpus, RunTwiceIsByteIdentical) {
  testing::TempDir a, b;
  const auto ma = gen_corpus({6, 32, 32}, 7, a.path());
  const auto mb = gen_corpus({6, 32, 32}, 7, b.path());
  EXPECT_EQ(ma.to_jsonl(), mb.to_jsonl());
  EXPECT_EQ(testing::snapshot(a.path()), testing::snapshot(b.path()));
}

TEST(Corpus, DifferentSeedsDiffer) {
  testing::TempDir a, b;
  gen_corpus({2, 16, 16}, 7, a.path());
  gen_corpus({2, 16, 16}, 8, b.path());
  EXPECT_NE(testing::snapshot(a.path()), testing::snapshot(b.path()));
}

TEST(Corpus, HundredPerClass) {
  testing::TempDir dir;
  const auto m = gen_corpus({100, 32, 32}, 7, dir.path());
  EXPECT_EQ(m.size(), 200u);
  EXPECT_EQ(m.real_with_label(Label::Benign).size(), 100u);
  EXPECT_EQ(m.real_with_label(Label::Malignant).size(), 100u);
  for (const auto& r : m.records()) {
    ASSERT_TRUE(std::filesystem::exists(dir / r.path)) << r.path;
  }
  const Image first = read_png(dir / m.records().front().path);
  EXPECT_EQ(first.height(), 32u);
  EXPECT_EQ(first.width(), 32u);
}

TEST(Corpus, TexturedClassHasMoreHighFrequencyEnergy) {
  const auto samples = testing::desk_samples(100, 7);
  std::vector<double> benign, malignant;
  for (const auto& s : samples) {
    (s.label == Label::Benign ? benign : malignant).push_back(laplacian_energy(s.image));
  }
  Rng rng(1);
  std::size_t wins = 0;
  const std::size_t trials = 2000;
  for (std::size_t i = 0; i < trials; ++i) {
    wins += malignant[rng.below(malignant.size())] > benign[rng.below(benign.size())] ? 1 : 0;
  }
  EXPECT_GE(static_cast<double>(wins) / trials, 0.95);
}

TEST(Corpus, RejectsTinyImages) {
  testing::TempDir dir;
  EXPECT_THROW(gen_corpus({2, 15, 32}, 7, dir.path()), InvalidArgument);
  EXPECT_THROW(gen_corpus({0, 32, 32}, 7, dir.path()), InvalidArgument);
}

TEST(Corpus, ReservePoolIsStratifiedAndSeeded) {
  const auto m = real_manifest(10);
  const auto pool = reserve_pool(m, 3, 5);
  ASSERT_EQ(pool.size(), 6u);
  EXPECT_EQ(pool, reserve_pool(m, 3, 5));
  std::size_t benign = 0;
  for (const auto& id : pool) benign += m.at(id).label == Label::Benign ? 1 : 0;
  EXPECT_EQ(benign, 3u);
  EXPECT_THROW(reserve_pool(m, 11, 5), InvalidArgument);
}

// ------------------------------------------------------------------- pairs

TEST(PlanPairs, ExhaustiveBudgetCoversEveryPair) {
  const auto plan = plan_pairs({"b0", "b1", "b2"}, {"m0", "m1"}, 6, 3);
  ASSERT_EQ(plan.size(), 6u);
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& e : plan.entries) seen.insert({e.content_id, e.style_id});
  EXPECT_EQ(seen.size(), 6u);
}

TEST(PlanPairs, VisitsEveryContentBeforeRepeating) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto plan = plan_pairs({"b0", "b1", "b2"}, {"m0", "m1"}, 4, seed);
    ASSERT_EQ(plan.size(), 4u);
    const std::set<std::string> first_round = {plan.entries[0].content_id, plan.entries[1].content_id,
                                               plan.entries[2].content_id};
    EXPECT_EQ(first_round.size(), 3u);
    std::set<std::pair<std::string, std::string>> distinct;
    for (const auto& e : plan.entries) distinct.insert({e.content_id, e.style_id});
    EXPECT_EQ(distinct.size(), 4u);
  }
}

TEST(PlanPairs, SameSeedSamePlan) {
  const std::vector<std::string> c = {"b0", "b1", "b2", "b3"}, s = {"m0", "m1", "m2"};
  EXPECT_EQ(plan_pairs(c, s, 9, 4).entries, plan_pairs(c, s, 9, 4).entries);
  EXPECT_NE(plan_pairs(c, s, 9, 4).entries, plan_pairs(c, s, 9, 5).entries);
}

TEST(PlanPairs, PerPairSeedsAreDistinct) {
  const auto plan = plan_pairs({"b0", "b1", "b2", "b3"}, {"m0", "m1", "m2"}, 12, 4);
  std::set<std::uint64_t> seeds;
  for (const auto& e : plan.entries) seeds.insert(e.seed);
  EXPECT_EQ(seeds.size(), 12u);
}

TEST(PlanPairs, OverBudgetNamesTheMaximum) {
  try {
    plan_pairs({"b0", "b1", "b2"}, {"m0", "m1"}, 7, 3);
    FAIL() << "expected InvalidArgument";
  } catch (const InvalidArgument& e) {
    EXPECT_NE(std::string(e.what()).find("= 6"), std::string::npos) << e.what();
  }
}

TEST(PlanPairs, FromManifestUsesBenignContentAndMalignantStyle) {
  const auto m = real_manifest(4);
  const auto plan = plan_pairs(m, 10, 2);
  ASSERT_EQ(plan.size(), 10u);
  for (const auto& e : plan.entries) {
    EXPECT_EQ(m.at(e.content_id).label, Label::Benign);
    EXPECT_EQ(m.at(e.style_id).label, Label::Malignant);
  }
  const auto pooled = plan_pairs(m, 4, 2, {"b1", "b3", "m0", "m2"});
  for (const auto& e : pooled.entries) {
    EXPECT_TRUE(e.content_id == "b1" || e.content_id == "b3");
    EXPECT_TRUE(e.style_id == "m0" || e.style_id == "m2");
  }
}

TEST(PlanPairs, NeedsBothClasses) {
  DatasetManifest m;
  m.append(real_record("b0", Label::Benign));
  EXPECT_THROW(plan_pairs(m, 1, 1), InvalidArgument);
}

// ------------------------------------------------------------ pseudo-label

TEST(BalanceThreshold, WorkedExample) {
  const std::vector<double> scores = {0.9, 0.8, 0.6, 0.4, 0.2, 0.1};
  const auto rep = balance_threshold(scores);
  EXPECT_NEAR(rep.threshold, 0.5, 1e-15);
  EXPECT_EQ(rep.benign, 3u);
  EXPECT_EQ(rep.malignant, 3u);
  EXPECT_EQ(rep.labels.front(), Label::Malignant);
  EXPECT_EQ(rep.labels.back(), Label::Benign);
}

TEST(BalanceThreshold, TwoScores) {
  const std::vector<double> scores = {0.2, 0.8};
  const auto rep = balance_threshold(scores);
  EXPECT_NEAR(rep.threshold, 0.5, 1e-15);
  EXPECT_EQ(rep.benign, 1u);
  EXPECT_EQ(rep.malignant, 1u);
}

TEST(BalanceThreshold, OddCountsDifferByOne) {
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> scores(5);
    for (auto& s : scores) s = rng.uniform();
    const auto rep = balance_threshold(scores);
    EXPECT_EQ(rep.benign + rep.malignant, 5u);
    EXPECT_TRUE((rep.benign == 3 && rep.malignant == 2) || (rep.benign == 2 && rep.malignant == 3));
  }
}

TEST(BalanceThreshold, AgreesWithExhaustiveSweep) {
  Rng rng(11);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + rng.below(40);
    const bool coarse = rng.bernoulli(0.3);
    std::vector<double> scores(n);
    for (auto& s : scores) s = coarse ? static_cast<double>(rng.below(5)) / 4.0 : rng.uniform();
    const std::size_t best = oracle::best_sweep_imbalance(scores);
    if (best <= 1) {
      const auto rep = balance_threshold(scores);
      const std::size_t above = count_at_or_above(rep);
      EXPECT_EQ(above, rep.malignant);
      EXPECT_LE(std::max(rep.benign, rep.malignant) - std::min(rep.benign, rep.malignant), 1u);
    } else {
      EXPECT_THROW(balance_threshold(scores), NoBalancingThreshold);
    }
  }
}

TEST(BalanceThreshold, IdenticalScoresAreRejected) {
  const std::vector<double> scores(6, 0.4);
  EXPECT_THROW(balance_threshold(scores), NoBalancingThreshold);
  const std::vector<double> one = {0.5};
  EXPECT_THROW(balance_threshold(one), InvalidArgument);
}

TEST(AssignPseudoLabels, FallsBackToAlternating) {
  const std::vector<double> scores = {0.4, 0.4, 0.4, 0.4, 0.4};
  const auto rep = assign_pseudo_labels(scores, true);
  EXPECT_EQ(rep.rule, LabelRule::Alternating);
  EXPECT_EQ(rep.benign, 3u);
  EXPECT_EQ(rep.malignant, 2u);
  EXPECT_EQ(rep.labels[0], Label::Benign);
  EXPECT_EQ(rep.labels[1], Label::Malignant);
}

TEST(AssignPseudoLabels, FixedCutWhenBalancingIsOff) {
  const std::vector<double> scores = {0.9, 0.7, 0.6, 0.1};
  const auto rep = assign_pseudo_labels(scores, false);
  EXPECT_EQ(rep.rule, LabelRule::FixedCut);
  EXPECT_EQ(rep.threshold, 0.5);
  EXPECT_EQ(rep.malignant, 3u);
  EXPECT_EQ(assign_pseudo_labels(scores, true).rule, LabelRule::Balanced);
}

class PseudoLabelScores : public ::testing::Test {
 protected:
  void SetUp() override {
    real = real_manifest(1);
    std::filesystem::create_directories(dir / "synthetic");
    for (int i = 0; i < 3; ++i) {
      const std::string id = "s" + std::to_string(i);
      synthetic.append(synthetic_record(id, "b0", "m0", std::nullopt));
      write_png(dir / ("synthetic/" + id + ".png"),
                quantize(render_lesion(i % 2 ? Label::Malignant : Label::Benign, 32, 32, 40 + i)));
    }
  }

  testing::TempDir dir;
  DatasetManifest real;
  DatasetManifest synthetic;
};

TEST_F(PseudoLabelScores, SymmetricZeroModelScoresHalf) {
  const auto net = featnet::zero_weights(featnet::feature_extractor_spec());
  const auto scores = pseudo_label_scores(net, synthetic, dir.path());
  ASSERT_EQ(scores.size(), 3u);
  for (const auto& s : scores) {
    ASSERT_TRUE(s.score.has_value()) << s.error;
    EXPECT_EQ(*s.score, 0.5);
  }
}

TEST_F(PseudoLabelScores, Deterministic) {
  const auto net = featnet::init_weights(featnet::feature_extractor_spec(), 4);
  const auto a = pseudo_label_scores(net, synthetic, dir.path());
  const auto b = pseudo_label_scores(net, synthetic, dir.path());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].score, b[i].score);
}

TEST_F(PseudoLabelScores, UnreadableImageIsRecordedAndBatchContinues) {
  std::filesystem::remove(dir / "synthetic/s1.png");
  const auto net = featnet::init_weights(featnet::feature_extractor_spec(), 4);
  const auto scores = pseudo_label_scores(net, synthetic, dir.path());
  ASSERT_EQ(scores.size(), 3u);
  EXPECT_TRUE(scores[0].score.has_value());
  EXPECT_FALSE(scores[1].score.has_value());
  EXPECT_FALSE(scores[1].error.empty());
  EXPECT_TRUE(scores[2].score.has_value());
}

Image crafted_stripes() {
  Image img(32, 32, 3);
  const double tone[3] = {0.27, 0.21, 0.31};
  for (std::size_t y = 0; y < 32; ++y) {
    for (std::size_t x = 0; x < 32; ++x) {
      const double s = std::sin(2.0 * std::numbers::pi * 0.17 * (static_cast<double>(x) + 0.5 * y));
      for (std::size_t c = 0; c < 3; ++c) img.at(y, x, c) = tone[c] * (1.0 + 0.2 * s);
    }
  }
  return quantize(img);
}

Image crafted_blob() {
  Image img(32, 32, 3);
  const double skin[3] = {0.84, 0.66, 0.56}, brown[3] = {0.56, 0.37, 0.27};
  for (std::size_t y = 0; y < 32; ++y) {
    for (std::size_t x = 0; x < 32; ++x) {
      const double r = std::hypot(y + 0.5 - 16.0, x + 0.5 - 16.0);
      const double inside = std::clamp((13.0 - r) / 6.0, 0.0, 1.0);
      for (std::size_t c = 0; c < 3; ++c) img.at(y, x, c) = skin[c] + inside * (brown[c] - skin[c]);
    }
  }
  return quantize(img);
}

TEST(PseudoLabelClassifier, StripesOutscoreBlob) {
  const auto& net = testing::trained_featnet(40).weights;
  const double stripes = featnet::predict_proba(net, crafted_stripes())[1];
  const double blob = featnet::predict_proba(net, crafted_blob())[1];
  EXPECT_GT(stripes, blob);
}

// ------------------------------------------------------------------- folds

std::vector<const Record*> reals(const DatasetManifest& m) { return m.with_source(Source::Real); }

std::vector<std::string> ids_of(const DatasetManifest& m) {
  std::vector<std::string> out;
  for (const auto& r : m.records()) out.push_back(r.id);
  return out;
}

TEST(SplitFolds, TenImagesFiveFolds) {
  const auto real = real_manifest(5);
  const auto syn = all_pairs(real);
  const auto plan = split_folds(reals(real), syn, 5, 1);
  ASSERT_EQ(plan.folds.size(), 5u);
  for (const auto& f : plan.folds) {
    ASSERT_EQ(f.test.size(), 2u);
    EXPECT_EQ(f.validation.size(), 8u);
    EXPECT_NE(real.at(f.test[0]).label, real.at(f.test[1]).label);
  }
  EXPECT_NO_THROW(plan.validate(ids_of(real), syn));
}

TEST(SplitFolds, TestSetsPartitionTheRealImages) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto real = real_manifest(13);
    const auto syn = all_pairs(real);
    const auto plan = split_folds(reals(real), syn, 5, seed);
    std::multiset<std::string> tested;
    for (const auto& f : plan.folds) {
      tested.insert(f.test.begin(), f.test.end());
      std::set<std::string> both(f.test.begin(), f.test.end());
      for (const auto& id : f.validation) EXPECT_FALSE(both.contains(id));
    }
    const auto all = ids_of(real);
    EXPECT_EQ(tested, std::multiset<std::string>(all.begin(), all.end()));
  }
}

TEST(SplitFolds, FilterIsPerFold) {
  const auto real = real_manifest(5);
  const auto syn = all_pairs(real);
  const auto plan = split_folds(reals(real), syn, 5, 2);
  const std::string leaked_content = plan.folds[0].test[0][0] == 'b' ? plan.folds[0].test[0] : plan.folds[0].test[1];
  std::string consumer;
  for (const auto& r : syn.records()) {
    if (r.provenance->content_id == leaked_content) consumer = r.id;
  }
  ASSERT_FALSE(consumer.empty());
  auto trains = [&](std::size_t f) {
    const auto& t = plan.folds[f].training;
    return std::find(t.begin(), t.end(), consumer) != t.end();
  };
  EXPECT_FALSE(trains(0));
  bool elsewhere = false;
  for (std::size_t f = 1; f < 5; ++f) elsewhere = elsewhere || trains(f);
  EXPECT_TRUE(elsewhere);
}

TEST(SplitFolds, TrainingIsSyntheticOnly) {
  const auto real = real_manifest(6);
  auto syn = all_pairs(real);
  syn.append(synthetic_record("unlabeled", "b0", "m0", std::nullopt));
  const auto plan = split_folds(reals(real), syn, 3, 1);
  for (const auto& f : plan.folds) {
    for (const auto& id : f.training) {
      EXPECT_EQ(syn.at(id).source, Source::Synthetic);
      EXPECT_NE(id, "unlabeled");
    }
    for (const auto& id : f.test) EXPECT_EQ(real.at(id).source, Source::Real);
  }
}

TEST(SplitFolds, EmptyTrainingFoldIsRejectedWithCounts) {
  const auto real = real_manifest(5);
  DatasetManifest syn;
  syn.append(synthetic_record("s0", "b0", "m0"));
  try {
    split_folds(reals(real), syn, 5, 1, LeakageScope::TestAndValidation);
    FAIL() << "expected EmptyTrainingFold";
  } catch (const EmptyTrainingFold& e) {
    EXPECT_NE(std::string(e.what()).find("1 removed"), std::string::npos) << e.what();
  }
}

TEST(SplitFolds, TestAndValidationScopeUsesHeldOutSources) {
  const auto real = real_manifest(5);
  DatasetManifest syn;
  syn.append(synthetic_record("s0", "pool_b", "pool_m"));
  const auto plan = split_folds(reals(real), syn, 5, 1, LeakageScope::TestAndValidation);
  for (const auto& f : plan.folds) EXPECT_EQ(f.training, std::vector<std::string>{"s0"});
  EXPECT_TRUE(leakage_check(plan, syn).empty());
}

TEST(SplitFolds, RejectsTooFewImagesOrFolds) {
  const auto real = real_manifest(3);
  const auto syn = all_pairs(real);
  EXPECT_THROW(split_folds(reals(real), syn, 4, 1), InvalidArgument);
  EXPECT_THROW(split_folds(reals(real), syn, 1, 1), InvalidArgument);
}

TEST(FoldPlan, JsonRoundTrip) {
  const auto real = real_manifest(5);
  const auto syn = all_pairs(real);
  const auto plan = split_folds(reals(real), syn, 5, 9);
  const auto back = FoldPlan::from_json(plan.to_json());
  EXPECT_EQ(back.to_json(), plan.to_json());
  EXPECT_EQ(back.k, 5u);
  EXPECT_EQ(back.seed, 9u);
  EXPECT_EQ(back.folds[3].training, plan.folds[3].training);
}

TEST(FoldPlan, ValidateCatchesStructuralErrors) {
  const auto real = real_manifest(5);
  const auto syn = all_pairs(real);
  auto plan = split_folds(reals(real), syn, 5, 9);
  auto broken = plan;
  broken.folds[0].training.push_back("b0");
  EXPECT_THROW(broken.validate(ids_of(real), syn), InvalidArgument);
  broken = plan;
  broken.folds[1].validation.push_back(broken.folds[1].test[0]);
  EXPECT_THROW(broken.validate(ids_of(real), syn), InvalidArgument);
  broken = plan;
  broken.folds[2].validation.pop_back();
  EXPECT_THROW(broken.validate(ids_of(real), syn), InvalidArgument);
}

// ----------------------------------------------------------------- leakage

TEST(LeakageCheck, SplitOutputAlwaysPasses) {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    const auto real = real_manifest(5 + seed % 7);
    const auto syn = all_pairs(real);
    for (const auto scope : {LeakageScope::Test}) {
      EXPECT_TRUE(leakage_check(split_folds(reals(real), syn, 2 + seed % 4, seed, scope), syn).empty());
    }
  }
}

TEST(LeakageCheck, HandBuiltViolationNamesBothIds) {
  DatasetManifest syn;
  syn.append(synthetic_record("s0", "b0", "m9"));
  FoldPlan plan;
  plan.k = 2;
  plan.folds = {Fold{{"b0", "m0"}, {"b1", "m1"}, {"s0"}}, Fold{{"b1", "m1"}, {"b0", "m0"}, {}}};
  const auto v = leakage_check(plan, syn);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0], (LeakageViolation{0, "s0", "b0"}));
}

TEST(LeakageCheck, FlagsEveryFoldZeroTrainingImage) {
  const auto real = real_manifest(5);
  auto plan = split_folds(reals(real), all_pairs(real), 5, 3);
  DatasetManifest syn;
  const auto& test0 = plan.folds[0].test;
  for (int i = 0; i < 6; ++i) syn.append(synthetic_record("t" + std::to_string(i), test0[0], test0[1]));
  plan.folds[0].training = {"t0", "t1", "t2", "t3", "t4", "t5"};
  std::set<std::string> flagged;
  for (const auto& v : leakage_check(plan, syn)) {
    if (v.fold == 0) flagged.insert(v.synthetic_id);
  }
  EXPECT_EQ(flagged.size(), 6u);
}

TEST(LeakageCheck, UnknownTrainingIdIsFlagged) {
  FoldPlan plan;
  plan.k = 1;
  plan.folds = {Fold{{"b0"}, {}, {"ghost"}}};
  const auto v = leakage_check(plan, DatasetManifest{});
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].synthetic_id, "ghost");
  EXPECT_TRUE(v[0].real_id.empty());
}

TEST(LeakageCheck, DetectsEveryInjectedLeak) {
  const auto real = real_manifest(20);
  const auto syn = all_pairs(real);
  auto plan = split_folds(reals(real), syn, 5, 4);
  const auto injected = inject_leakage(plan, syn, 100, 8);
  ASSERT_EQ(injected.size(), 100u);
  std::set<std::pair<std::size_t, std::string>> found;
  for (const auto& v : leakage_check(plan, syn)) found.insert({v.fold, v.synthetic_id});
  for (const auto& leak : injected) EXPECT_TRUE(found.contains({leak.fold, leak.synthetic_id}));
  EXPECT_EQ(found.size(), 100u);
}

}  // namespace
}  // namespace styleforge::pipeline
