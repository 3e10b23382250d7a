#include "hapod/datagen.hpp"
#include "hapod/pod.hpp"

#include <benchmark/benchmark.h>

#include <cmath>

namespace {

using namespace hapod;

constexpr double kTarget = 1e-3;

void BM_PodGram(benchmark::State& state) {
  const SnapshotBlock s = synthetic_decay(state.range(0), state.range(1), 0.2, 1);
  const double eps = std::sqrt(static_cast<double>(s.count())) * kTarget;
  for (auto _ : state) benchmark::DoNotOptimize(pod(s, eps));
  state.SetComplexityN(state.range(1));
}
BENCHMARK(BM_PodGram)->ArgsProduct({{500}, {250, 500, 1000, 2000}})->Unit(benchmark::kMillisecond)->Complexity();

void BM_PodSvd(benchmark::State& state) {
  const SnapshotBlock s = synthetic_decay(state.range(0), state.range(1), 0.2, 1);
  const double eps = std::sqrt(static_cast<double>(s.count())) * kTarget;
  const PodBackend svd{PodMethod::DirectSvd};
  for (auto _ : state) benchmark::DoNotOptimize(pod(s, eps, svd));
  state.SetComplexityN(state.range(1));
}
BENCHMARK(BM_PodSvd)->ArgsProduct({{500}, {250, 500, 1000, 2000}})->Unit(benchmark::kMillisecond)->Complexity();

// Folding a block into orthonormal prior modes against the plain POD of the
// concatenation.
void BM_BlockGramianFold(benchmark::State& state) {
  const SnapshotBlock s = synthetic_decay(500, 2 * state.range(0), 0.2, 2);
  const SnapshotBlock first = s.columns(0, state.range(0));
  const SnapshotBlock fresh = s.columns(state.range(0), state.range(0));
  const ModeSet prior = pod(first, 1e-4);
  for (auto _ : state) benchmark::DoNotOptimize(block_gramian_pod(prior, fresh, 1e-4));
}
BENCHMARK(BM_BlockGramianFold)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);

void BM_ConcatenatedFold(benchmark::State& state) {
  const SnapshotBlock s = synthetic_decay(500, 2 * state.range(0), 0.2, 2);
  const SnapshotBlock first = s.columns(0, state.range(0));
  const SnapshotBlock fresh = s.columns(state.range(0), state.range(0));
  const ModeSet prior = pod(first, 1e-4);
  const SnapshotBlock joined = SnapshotBlock::concat(SnapshotBlock(s.space(), prior.scaled_modes()), fresh);
  for (auto _ : state) benchmark::DoNotOptimize(pod(joined, 1e-4));
}
BENCHMARK(BM_ConcatenatedFold)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);

}  // namespace
