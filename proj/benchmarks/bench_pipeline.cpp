#include <benchmark/benchmark.h>

#include <random>

#include "regime_graph/correlation.hpp"
#include "regime_graph/market_graphs.hpp"
#include "regime_graph/phase_clustering.hpp"
#include "regime_graph/segmentation.hpp"
#include "regime_graph/synthetic.hpp"

using namespace regime_graph;

namespace {

std::vector<double> regimes(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z;
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = z(rng) * (1.0 + double((4 * i / n) % 2));
  return x;
}

CorrelationMatrix random_matrix(std::size_t n, std::uint64_t seed) {
  auto data = generate_synthetic(hub_scenario(n, 500, 1.0, 0.8, seed));
  return cross_correlation(data.series);
}

}  // namespace

static void BM_BestSplit(benchmark::State& state) {
  auto x = regimes(static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(best_split(x, 13));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_BestSplit)->RangeMultiplier(4)->Range(256, 16384)->Complexity(benchmark::oN);

static void BM_RecursiveSegment(benchmark::State& state) {
  auto x = regimes(static_cast<std::size_t>(state.range(0)), 2);
  SegmentationConfig c;
  c.refine = state.range(1) != 0;
  for (auto _ : state) benchmark::DoNotOptimize(recursive_segment(x, c));
}
BENCHMARK(BM_RecursiveSegment)->ArgsProduct({{1000, 4000, 16000}, {0, 1}});

static void BM_CompleteLink(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> sig(0.001, 0.02);
  std::vector<GaussianParams> p(n);
  for (auto& g : p) g = {0.0, sig(rng), 200};
  for (auto _ : state) benchmark::DoNotOptimize(complete_link_cluster(p));
}
BENCHMARK(BM_CompleteLink)->Arg(16)->Arg(64)->Arg(256);

static void BM_Mst(benchmark::State& state) {
  auto c = random_matrix(static_cast<std::size_t>(state.range(0)), 4);
  for (auto _ : state) benchmark::DoNotOptimize(mst(c));
}
BENCHMARK(BM_Mst)->Arg(10)->Arg(40);

static void BM_Pmfg(benchmark::State& state) {
  auto c = random_matrix(static_cast<std::size_t>(state.range(0)), 5);
  for (auto _ : state) benchmark::DoNotOptimize(pmfg(c));
}
BENCHMARK(BM_Pmfg)->Arg(10)->Arg(40);
BENCHMARK_MAIN();
