#include <benchmark/benchmark.h>

#include "mmvlamp/eval.hpp"
#include "mmvlamp/frontend.hpp"
#include "mmvlamp/graph.hpp"
#include "mmvlamp/kernels.hpp"
#include "mmvlamp/training.hpp"

using namespace mmv;

namespace {

// Shapes of the decoder hot path at desk scale: B (256 x 16) times a
// residual (16 x 16), and A^H (256 x 16) applied to a 16 x 320 batch.
CMatrix random(std::size_t r, std::size_t c, std::uint64_t seed) {
  Rng rng(seed);
  return complex_normal_matrix(rng, r, c);
}

template <bool Fast>
void BM_gemm(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto k = static_cast<std::size_t>(state.range(1));
  const auto m = static_cast<std::size_t>(state.range(2));
  const CMatrix a = random(n, k, 1), b = random(k, m, 2);
  CMatrix c;
  for (auto _ : state) {
    if constexpr (Fast)
      kernels::gemm(a, b, c);
    else
      kernels::gemm_reference(a, b, c);
    benchmark::DoNotOptimize(c.data().data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n * k * m));
}

void gemm_shapes(benchmark::internal::Benchmark* b) {
  b->Args({256, 16, 16})->Args({16, 256, 16})->Args({256, 16, 320})->Args({512, 512, 512});
}

BENCHMARK(BM_gemm<true>)->Name("gemm")->Apply(gemm_shapes);
BENCHMARK(BM_gemm<false>)->Name("gemm_reference")->Apply(gemm_shapes);

struct Batch {
  SystemConfig sys;
  Dictionary dict = build_redundant_dictionary(sys.n_bs, sys.g);
  CrnModel model = initial_crn(sys, dict, 1);
  ChannelSet h = generate_channels(sys, 20, 1, GridMode::off_grid);
  ChannelSet noise;

  Batch() {
    Rng rng(3);
    for (std::size_t i = 0; i < h.size(); ++i) noise.push_back(complex_normal_matrix(rng, sys.m(), sys.k, 0.01));
  }
};

// One training step's gradient on a desk-scale batch of 20, serial and
// OpenMP over samples. Both produce identical results.
template <bool Parallel>
void BM_batch_gradient(benchmark::State& state) {
  static const Batch batch;
  for (auto _ : state) {
    const CrnBatchGradient g =
        crn_batch_gradient(batch.model.xi, batch.model.lamp, batch.h, batch.noise, batch.dict, batch.sys.layers,
                           batch.sys.link, {}, nullptr, Parallel);
    benchmark::DoNotOptimize(g.loss);
  }
}

BENCHMARK(BM_batch_gradient<false>)->Name("crn_batch_gradient/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_batch_gradient<true>)->Name("crn_batch_gradient/parallel")->Unit(benchmark::kMillisecond);

void BM_lamp_forward(benchmark::State& state) {
  static const Batch batch;
  const CMatrix a = effective_matrix(phases_to_combiner(batch.model.xi), batch.dict, batch.sys.link);
  Rng rng(4);
  const CMatrix y = measure(phases_to_combiner(batch.model.xi), batch.h[0], 10.0, rng).y;
  for (auto _ : state) benchmark::DoNotOptimize(mmv_lamp_run(y, a, batch.model.lamp, 5).output().data().data());
}

void BM_somp(benchmark::State& state) {
  static const Batch batch;
  const CMatrix a = effective_matrix(phases_to_combiner(batch.model.xi), batch.dict, batch.sys.link);
  Rng rng(4);
  const CMatrix y = measure(phases_to_combiner(batch.model.xi), batch.h[0], 10.0, rng).y;
  for (auto _ : state) benchmark::DoNotOptimize(somp_run(y, a, 4).x_hat.data().data());
}

BENCHMARK(BM_lamp_forward)->Name("mmv_lamp_run/T=5")->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_somp)->Name("somp_run/L=4")->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
