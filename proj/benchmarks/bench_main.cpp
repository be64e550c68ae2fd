// CPU-emulation microbenchmarks. Timings describe this emulator only.

#include <benchmark/benchmark.h>

#include <vector>

#include "fused3s/bsb.hpp"
#include "fused3s/fused_attention.hpp"
#include "fused3s/graphio.hpp"
#include "fused3s/oracles.hpp"
#include "fused3s/prng.hpp"
#include "fused3s/tile_arith.hpp"

namespace {

using namespace fused3s;

std::vector<Half> random_halves(SplitMix64& rng, std::size_t count) {
  std::vector<Half> out(count);
  for (auto& h : out) h = Half::from_double(rng.symmetric());
  return out;
}

DenseMatrix random_operand(SplitMix64& rng, std::size_t rows, std::size_t cols) {
  std::vector<double> values(rows * cols);
  for (auto& v : values) v = rng.symmetric();
  return DenseMatrix::from_values(rows, cols, std::move(values), Precision::half);
}

CooMatrix uniform_graph(std::uint32_t n, double density, std::uint64_t seed) {
  SyntheticSpec spec;
  spec.kind = SyntheticKind::uniform;
  spec.n = n;
  spec.density = density;
  spec.seed = seed;
  return generate_synthetic(spec);
}

// range(0) = K, m = 16 rows, P = 64 columns.
void BM_Tbgemm(benchmark::State& state) {
  const auto k = static_cast<std::size_t>(state.range(0));
  constexpr std::size_t m = 16, p = 64;
  SplitMix64 rng(1);
  const auto a = random_halves(rng, m * k);
  const auto b = random_halves(rng, k * p);
  std::vector<float> acc(m * p);
  for (auto _ : state) {
    std::fill(acc.begin(), acc.end(), 0.0f);
    tbgemm(kDefaultTile, {a, m, k}, {b, k, p}, {acc, m, p});
    benchmark::DoNotOptimize(acc.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(2 * m * k * p));
}
BENCHMARK(BM_Tbgemm)->RangeMultiplier(4)->Range(16, 1024);

// range(0) = N, range(1) = d; density 2%.
void BM_FusedForward(benchmark::State& state) {
  const auto n = static_cast<std::uint32_t>(state.range(0));
  const auto d = static_cast<std::size_t>(state.range(1));
  SplitMix64 rng(2);
  const auto a = build_bsb(uniform_graph(n, 0.02, 3), 16, 8);
  const auto q = random_operand(rng, n, d);
  const auto k = random_operand(rng, n, d);
  const auto v = random_operand(rng, n, d);
  for (auto _ : state) benchmark::DoNotOptimize(fused3s_forward(a, q, k, v));
  state.counters["nnz"] = static_cast<double>(a.nnz());
}
BENCHMARK(BM_FusedForward)->ArgsProduct({{256, 1024, 4096}, {32, 64}})->Unit(benchmark::kMillisecond);

void BM_UnfusedOracle(benchmark::State& state) {
  const auto n = static_cast<std::uint32_t>(state.range(0));
  constexpr std::size_t d = 32;
  SplitMix64 rng(2);
  const auto a = uniform_graph(n, 0.02, 3);
  const auto q = random_operand(rng, n, d);
  const auto k = random_operand(rng, n, d);
  const auto v = random_operand(rng, n, d);
  const SoftmaxOptions opts{SoftmaxVariant::max_stabilized, Precision::single, 16};
  for (auto _ : state) benchmark::DoNotOptimize(unfused_3s_oracle(a, q, k, v, opts));
}
BENCHMARK(BM_UnfusedOracle)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

void BM_BuildBsb(benchmark::State& state) {
  SyntheticSpec spec;
  spec.kind = SyntheticKind::power_law;
  spec.n = static_cast<std::uint32_t>(state.range(0));
  spec.attach = 4;
  const auto coo = generate_synthetic(spec);
  for (auto _ : state) benchmark::DoNotOptimize(build_bsb(coo, 16, 8));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(coo.nnz()));
}
BENCHMARK(BM_BuildBsb)->RangeMultiplier(8)->Range(1 << 10, 1 << 16)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
