#include <benchmark/benchmark.h>

#include <vector>

#include "styleforge/autodiff/ops.hpp"
#include "styleforge/autodiff/tape.hpp"
#include "styleforge/featnet/network.hpp"
#include "styleforge/featnet/weights.hpp"
#include "styleforge/image.hpp"
#include "styleforge/nst/style_transfer.hpp"
#include "styleforge/pipeline/corpus.hpp"
#include "styleforge/rng.hpp"
#include "styleforge/trainer/metrics.hpp"

namespace {

using namespace styleforge;

ad::Tensor random_tensor(const ad::Shape& shape, std::uint64_t seed) {
  Rng rng(seed);
  ad::Tensor t(shape);
  for (auto& v : t.data()) v = rng.uniform(-1.0, 1.0);
  return t;
}

void BM_Conv2dForwardBackward(benchmark::State& state) {
  const auto side = static_cast<std::size_t>(state.range(0));
  const auto channels = static_cast<std::size_t>(state.range(1));
  const auto x = random_tensor({side, side, channels}, 1);
  const auto k = random_tensor({3, 3, channels, channels}, 2);
  const ad::Tensor b({channels});
  for (auto _ : state) {
    ad::Tape tape;
    const auto xv = tape.variable(x);
    const auto kv = tape.variable(k);
    const auto y = ad::conv2d(tape, xv, kv, tape.constant(b), ad::Padding::Same);
    tape.backward(ad::mse(tape, y, tape.constant(ad::Tensor(tape.value(y).shape()))));
    benchmark::DoNotOptimize(tape.grad(kv));
  }
}
BENCHMARK(BM_Conv2dForwardBackward)->Args({32, 16})->Args({16, 32})->Args({8, 64});

void BM_Gram(benchmark::State& state) {
  const auto side = static_cast<std::size_t>(state.range(0));
  const auto channels = static_cast<std::size_t>(state.range(1));
  const auto a = random_tensor({side, side, channels}, 3);
  for (auto _ : state) benchmark::DoNotOptimize(nst::gram_matrix(a));
}
BENCHMARK(BM_Gram)->Args({32, 16})->Args({8, 64});

void BM_StyleTransferIteration(benchmark::State& state) {
  const auto net = featnet::init_weights(featnet::feature_extractor_spec(32), 7);
  const Image content = quantize(pipeline::render_lesion(Label::Benign, 32, 32, 1));
  const Image style = quantize(pipeline::render_lesion(Label::Malignant, 32, 32, 2));
  nst::StyleTransferConfig cfg;
  cfg.iterations = 1;
  for (auto _ : state) benchmark::DoNotOptimize(nst::synthesize(content, style, net, cfg, 1));
}
BENCHMARK(BM_StyleTransferIteration)->Unit(benchmark::kMillisecond);

void BM_Auc(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(4);
  std::vector<double> scores(n);
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    scores[i] = rng.uniform();
    labels[i] = static_cast<int>(i % 2);
  }
  for (auto _ : state) benchmark::DoNotOptimize(trainer::auc(scores, labels));
  state.SetComplexityN(static_cast<benchmark::IterationCount>(n));
}
BENCHMARK(BM_Auc)->RangeMultiplier(10)->Range(100, 100000)->Complexity(benchmark::oNLogN);

}  // namespace

BENCHMARK_MAIN();
