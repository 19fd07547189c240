#include <benchmark/benchmark.h>

#include <random>

#include "rrse/blocks.hpp"
#include "rrse/network.hpp"
#include "rrse/ops.hpp"
#include "rrse/random.hpp"

using namespace rrse;

namespace {

Tensor noise(Shape shape, std::uint64_t seed) {
  Tensor t(std::move(shape));
  Rng rng(seed);
  std::normal_distribution<float> d;
  for (float& v : t.values()) v = d(rng);
  return t;
}

// args: channels, extent, dilation
void BM_Conv3x3(benchmark::State& state) {
  const auto c = static_cast<std::size_t>(state.range(0));
  const auto e = static_cast<std::size_t>(state.range(1));
  const auto d = static_cast<std::size_t>(state.range(2));
  const auto p = ConvParams<float>::make(c, c, 3, d, 1);
  const Tensor x = noise({4, c, e, e}, 2);
  for (auto _ : state) benchmark::DoNotOptimize(conv2d_valid(x, p));
  const double out = double(e - 2 * d) * double(e - 2 * d);
  state.counters["GFLOP/s"] = benchmark::Counter(4 * 2.0 * 9 * double(c * c) * out,
                                                 benchmark::Counter::kIsIterationInvariantRate,
                                                 benchmark::Counter::kIs1000);
}
BENCHMARK(BM_Conv3x3)->Args({8, 92, 1})->Args({16, 48, 1})->Args({32, 24, 1})->Args({16, 48, 3});

void BM_Conv3x3Naive(benchmark::State& state) {
  const auto c = static_cast<std::size_t>(state.range(0));
  const auto e = static_cast<std::size_t>(state.range(1));
  const auto p = ConvParams<float>::make(c, c, 3, 1, 1);
  const Tensor x = noise({1, c, e, e}, 2);
  for (auto _ : state) benchmark::DoNotOptimize(conv2d_valid_naive(x, p));
}
BENCHMARK(BM_Conv3x3Naive)->Args({16, 48});

void BM_RRBlock(benchmark::State& state) {
  const auto mode = static_cast<RRMode>(state.range(0));
  const auto p = RRParams<float>::make(16, mode, 4, 10, 2, 3);
  const Tensor x = noise({4, 16, 40, 40}, 4);
  for (auto _ : state) benchmark::DoNotOptimize(rr_block(x, p));
  state.SetLabel(to_string(mode));
}
BENCHMARK(BM_RRBlock)->Arg(0)->Arg(1)->Arg(2);

void BM_TrainStep(benchmark::State& state) {
  NetworkSpec spec;
  spec.base_channels = 8;
  spec.recombination = state.range(0) != 0;
  spec.rr_mode = state.range(0) == 2 ? RRMode::segse : RRMode::none;
  Model m = Model::build(spec, 1);
  const Tensor x = noise({4, 4, 92, 92}, 5);
  ForwardOptions opts;
  opts.mode = Mode::train;
  for (auto _ : state) {
    TapeF tape;
    auto params = m.bind(tape, true);
    Var<float> y = m.forward(tape, tape.constant(x), params, opts);
    tape.backward(ad::sum(y));
    benchmark::DoNotOptimize(tape.grad(params[0]));
  }
}
BENCHMARK(BM_TrainStep)->Arg(0)->Arg(2)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
