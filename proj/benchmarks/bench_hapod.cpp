#include "hapod/datagen.hpp"
#include "hapod/exec.hpp"
#include "hapod/hapod.hpp"
#include "hapod/incremental.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace hapod;

constexpr double kTarget = 1e-3;

// Balanced tree over blocks of 100 columns; range(1) is the depth.
void BM_HapodBalanced(benchmark::State& state) {
  const SnapshotBlock s = synthetic_decay(500, state.range(0), 0.2, 1);
  const RootedTree tree = build_balanced(static_cast<std::size_t>(state.range(0) / 100),
                                         static_cast<std::size_t>(state.range(1)));
  const LeafAssignment leaves = LeafAssignment::split_uniform(tree, s);
  const auto tol = assign_tolerances(tree, leaves.counts(tree.node_count()), kTarget, 0.75);
  for (auto _ : state) benchmark::DoNotOptimize(run_hapod(tree, leaves, tol));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_HapodBalanced)
    ->ArgsProduct({{1000, 2000, 4000, 8000}, {2, 3}})
    ->Unit(benchmark::kMillisecond);

void BM_IncrementalStream(benchmark::State& state) {
  const SnapshotBlock s = synthetic_decay(500, state.range(0), 0.2, 1);
  const Index blocks = state.range(0) / 100;
  for (auto _ : state) {
    IncrementalSession session(kTarget, 0.75, static_cast<std::size_t>(blocks));
    for (Index b = 0; b < blocks; ++b) session.push(s.columns(b * 100, 100));
    benchmark::DoNotOptimize(session.finalize());
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_IncrementalStream)->Arg(1000)->Arg(2000)->Arg(4000)->Arg(8000)->Unit(benchmark::kMillisecond)->Complexity();

void BM_ParallelStar(benchmark::State& state) {
  const SnapshotBlock s = synthetic_decay(300, 3200, 0.2, 1);
  const RootedTree tree = build_star(32);
  const LeafAssignment leaves = LeafAssignment::split_uniform(tree, s);
  const auto tol = assign_tolerances(tree, leaves.counts(tree.node_count()), kTarget, 0.75);
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_parallel(tree, leaves, tol, {}, static_cast<std::size_t>(state.range(0))));
  }
}
BENCHMARK(BM_ParallelStar)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

}  // namespace
