// Serial reference kernels against their OpenMP versions, plus the hot library
// entry points. Worker count is the benchmark argument where it applies.

#include <benchmark/benchmark.h>

#include <cmath>

#include "spiky/bounds.hpp"
#include "spiky/cap_calculus.hpp"
#include "spiky/kernels.hpp"
#include "spiky/spiky_body.hpp"

using namespace spiky;

namespace {

const PointSet& spikes() {
  static const PointSet s = uniform_cloud(6, 2000, SeedSpec{1, 0}, 1);
  return s;
}

const PointSet& centers() {
  static const PointSet c = uniform_cloud(6, 4000, SeedSpec{1, 1}, 1);
  return c;
}

void BM_SignedCapCountsSerial(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(kernels::serial::signed_cap_counts(spikes(), centers(), 0.6));
}
BENCHMARK(BM_SignedCapCountsSerial)->Unit(benchmark::kMillisecond);

void BM_SignedCapCountsOmp(benchmark::State& state) {
  const int w = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::omp::signed_cap_counts(spikes(), centers(), 0.6, w));
}
BENCHMARK(BM_SignedCapCountsOmp)->Arg(1)->Arg(4)->Arg(16)->UseRealTime()->Unit(benchmark::kMillisecond);

void BM_ConflictingPairsSerial(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(kernels::serial::conflicting_pairs(centers(), 0.95));
}
BENCHMARK(BM_ConflictingPairsSerial)->Unit(benchmark::kMillisecond);

void BM_ConflictingPairsOmp(benchmark::State& state) {
  const int w = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::omp::conflicting_pairs(centers(), 0.95, w));
}
BENCHMARK(BM_ConflictingPairsOmp)->Arg(1)->Arg(4)->Arg(16)->UseRealTime()->Unit(benchmark::kMillisecond);

void BM_CoverageScanSerial(benchmark::State& state) {
  const PointSet net = uniform_cloud(4, 500, SeedSpec{2, 0}, 1);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::serial::coverage_scan(net, std::cos(0.5), 100000, SeedSpec{2, 1}));
}
BENCHMARK(BM_CoverageScanSerial)->Unit(benchmark::kMillisecond);

void BM_CoverageScanOmp(benchmark::State& state) {
  const PointSet net = uniform_cloud(4, 500, SeedSpec{2, 0}, 1);
  const int w = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(kernels::omp::coverage_scan(net, std::cos(0.5), 100000, SeedSpec{2, 1}, 16, w));
  }
}
BENCHMARK(BM_CoverageScanOmp)->Arg(1)->Arg(4)->Arg(16)->UseRealTime()->Unit(benchmark::kMillisecond);

void BM_CapMeasure(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  double phi = 0.1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(cap_measure(d, phi));
    phi = phi > 3.0 ? 0.1 : phi + 0.013;
  }
}
BENCHMARK(BM_CapMeasure)->Arg(3)->Arg(50)->Arg(2001);

void BM_PlanParameters(benchmark::State& state) {
  int n = 2;
  for (auto _ : state) {
    benchmark::DoNotOptimize(plan_parameters(1.1, n));
    n = n >= 2000 ? 2 : n + 1;
  }
}
BENCHMARK(BM_PlanParameters);

void BM_ConstructAndCheckE1(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::uint64_t s = 0;
  for (auto _ : state) {
    const SpikyBody b = construct(8, n, 1.1, SeedSpec{3, s++}, 1);
    benchmark::DoNotOptimize(check_e1(b, 1));
  }
}
BENCHMARK(BM_ConstructAndCheckE1)->Arg(100)->Arg(1000)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
