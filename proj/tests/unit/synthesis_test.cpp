#include <gtest/gtest.h>

#include <algorithm>

#include "fixtures.hpp"
#include "styleforge/featnet/network.hpp"
#include "styleforge/featnet/weights.hpp"
#include "styleforge/pipeline/corpus.hpp"
#include "styleforge/pipeline/pairs.hpp"
#include "styleforge/pipeline/synthesis.hpp"

namespace styleforge::pipeline {
namespace {

class Synthesis : public ::testing::Test {
 protected:
  void SetUp() override {
    real = gen_corpus({4, 16, 16}, 7, dir.path());
    cfg.iterations = 8;
  }

  SynthesisBatch run(const PairPlan& plan, std::size_t parallelism, const std::string& subdir = "synthetic") {
    SynthesisOptions opts;
    opts.parallelism = parallelism;
    opts.subdir = subdir;
    return run_synthesis_batch(plan, real, dir.path(), net, cfg, opts);
  }

  // Activations of 1e100 square past the double range in the style loss.
  void blow_up_first_layer() {
    for (auto& v : net.layers[0].kernel.data()) v *= 1e100;
  }

  static PairPlan self_pairs(const std::vector<std::string>& ids) {
    PairPlan plan;
    for (std::size_t i = 0; i < ids.size(); ++i) plan.entries.push_back({ids[i], ids[i], i});
    return plan;
  }

  testing::TempDir dir;
  DatasetManifest real;
  featnet::WeightBundle net = featnet::init_weights(featnet::feature_extractor_spec(16), 3);
  nst::StyleTransferConfig cfg;
};

TEST_F(Synthesis, EmptyPlanAddsNothing) {
  const auto batch = run(PairPlan{}, 2);
  EXPECT_TRUE(batch.records.empty());
  EXPECT_TRUE(batch.failures.empty());
}

TEST_F(Synthesis, ParallelismDoesNotChangeOutputs) {
  const auto plan = plan_pairs(real, 8, 5);
  const auto serial = run(plan, 1, "serial");
  const auto parallel = run(plan, 4, "parallel");
  ASSERT_EQ(serial.records.size(), 8u);
  ASSERT_EQ(parallel.records.size(), 8u);
  for (std::size_t i = 0; i < 8; ++i) {
    Record a = serial.records[i], b = parallel.records[i];
    EXPECT_EQ(a.id, synthetic_id(i));
    EXPECT_EQ(a.id, b.id);
    EXPECT_EQ(a.provenance, b.provenance);
    EXPECT_EQ(testing::read_text(dir / a.path), testing::read_text(dir / b.path)) << a.id;
  }
}

TEST_F(Synthesis, ExecutionOrderDoesNotChangeAnImage) {
  const auto plan = plan_pairs(real, 6, 5);
  PairPlan reversed = plan;
  std::reverse(reversed.entries.begin(), reversed.entries.end());
  const auto forward = run(plan, 2, "forward");
  const auto backward = run(reversed, 3, "backward");
  for (std::size_t i = 0; i < 6; ++i) {
    EXPECT_EQ(read_png(dir / forward.records[i].path), read_png(dir / backward.records[5 - i].path));
  }
}

TEST_F(Synthesis, ProvenanceReferencesRealImages) {
  const auto batch = run(plan_pairs(real, 5, 2), 2);
  for (const auto& r : batch.records) {
    ASSERT_TRUE(r.provenance.has_value());
    EXPECT_EQ(real.at(r.provenance->content_id).label, Label::Benign);
    EXPECT_EQ(real.at(r.provenance->style_id).label, Label::Malignant);
    const auto text = read_png_text(dir / r.path);
    EXPECT_NE(std::find(text.begin(), text.end(), PngText{"content_id", r.provenance->content_id}), text.end());
    EXPECT_NE(std::find(text.begin(), text.end(), PngText{"nst_digest", cfg.digest()}), text.end());
  }
  DatasetManifest merged = real;
  for (const auto& r : batch.records) EXPECT_NO_THROW(merged.append(r));
}

TEST_F(Synthesis, OneFailureInElevenIsSkipped) {
  // Content == style keeps the loss at zero; the one mixed pair overflows.
  blow_up_first_layer();
  std::vector<std::string> ids;
  for (const auto& r : real.records()) ids.push_back(r.id);
  PairPlan plan = self_pairs(std::vector<std::string>(ids.begin(), ids.begin() + 8));
  plan.entries.push_back({ids[0], ids[1], 50});
  plan.entries.push_back({ids[2], ids[2], 51});
  plan.entries.push_back({ids[3], ids[3], 52});
  const auto batch = run(plan, 3);
  ASSERT_EQ(batch.failures.size(), 1u);
  EXPECT_EQ(batch.failures[0].plan_index, 8u);
  EXPECT_EQ(batch.records.size(), 10u);
  for (const auto& r : batch.records) EXPECT_NE(r.id, synthetic_id(8));
}

TEST_F(Synthesis, TooManyFailuresAbort) {
  blow_up_first_layer();
  EXPECT_THROW(run(plan_pairs(real, 4, 1), 2), SynthesisAborted);
}

TEST_F(Synthesis, RejectsUnknownIds) {
  PairPlan plan;
  plan.entries.push_back({"nope", "benign_0000", 1});
  EXPECT_THROW(run(plan, 1), InvalidArgument);
}

}  // namespace
}  // namespace styleforge::pipeline
