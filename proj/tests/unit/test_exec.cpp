#include "hapod/error.hpp"
#include "hapod/exec.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>

namespace hapod {
namespace {

using testing::random_decaying;

struct Workload {
  RootedTree tree;
  LeafAssignment leaves;
  ToleranceAssignment tol;
};

Workload make_setup(RootedTree tree, Index d, Index m, std::uint64_t seed, double target = 0.01) {
  std::mt19937_64 rng(seed);
  const SnapshotBlock all(InnerProductSpace(d), random_decaying(d, m, 0.1, rng));
  LeafAssignment leaves = LeafAssignment::split_uniform(tree, all);
  ToleranceAssignment tol = assign_tolerances(tree, leaves.counts(tree.node_count()), target);
  return {std::move(tree), std::move(leaves), std::move(tol)};
}

TEST(Plan, LevelSets) {
  const Schedule star = plan(build_star(4));
  ASSERT_EQ(star.waves.size(), 2u);
  EXPECT_EQ(star.waves[0], (std::vector<NodeId>{1, 2, 3, 4}));
  EXPECT_EQ(star.waves[1], std::vector<NodeId>{0});

  EXPECT_EQ(plan(build_chain(3)).waves.size(), 3u);

  const Schedule balanced = plan(build_balanced(100, 2));
  ASSERT_EQ(balanced.waves.size(), 2u);
  EXPECT_EQ(balanced.waves[0].size(), 100u);
  EXPECT_EQ(balanced.waves[1].size(), 1u);
}

TEST(Plan, RandomTreesRespectDependencies) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 100; ++trial) {
    const RootedTree t = testing::random_tree(1 + rng() % 50, rng);
    const Schedule s = plan(t);
    const TreeMaps m = derive_maps(t);
    EXPECT_LE(s.waves.size(), m.depth);
    std::vector<int> wave_of(t.node_count(), -1);
    for (std::size_t w = 0; w < s.waves.size(); ++w) {
      for (NodeId a : s.waves[w]) {
        EXPECT_EQ(wave_of[a], -1);
        wave_of[a] = static_cast<int>(w);
      }
    }
    for (NodeId a = 0; a < t.node_count(); ++a) {
      ASSERT_GE(wave_of[a], 0);
      for (NodeId c : t.children(a)) EXPECT_LT(wave_of[c], wave_of[a]);
    }
  }
}

void expect_same(const HapodResult& a, const HapodResult& b) {
  ASSERT_EQ(a.modes.size(), b.modes.size());
  EXPECT_LE((a.modes.sigmas - b.modes.sigmas).cwiseAbs().maxCoeff(), 1e-12 * std::max(1.0, b.modes.sigmas[0]));
  EXPECT_EQ(a.apriori_error_bound, b.apriori_error_bound);
  for (const NodeReport& r : b.reports) EXPECT_EQ(a.report(r.node).output_mode_count, r.output_mode_count);
}

TEST(RunParallel, SingleWorkerEqualsSequential) {
  const Workload s = make_setup(build_balanced(9, 3), 30, 90, 7);
  const auto [par, stats] = run_parallel(s.tree, s.leaves, s.tol, {}, 1);
  expect_same(par, run_hapod(s.tree, s.leaves, s.tol));
  EXPECT_EQ(stats.wave_times.size(), 3u);
}

TEST(RunParallel, StarWithFourWorkersEqualsSequential) {
  const Workload s = make_setup(build_star(8), 40, 160, 8);
  const HapodResult seq = run_hapod(s.tree, s.leaves, s.tol);
  for (int repeat = 0; repeat < 5; ++repeat) {
    const auto [par, stats] = run_parallel(s.tree, s.leaves, s.tol, {}, 4);
    expect_same(par, seq);
    // Identical per-node inputs give bit-identical outputs.
    EXPECT_EQ(par.modes.sigmas, seq.modes.sigmas);
  }
}

TEST(RunParallel, DeterministicAcrossWorkerCountsOnRandomTrees) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 15; ++trial) {
    RootedTree t = testing::random_tree(2 + rng() % 25, rng);
    while (derive_maps(t).depth < 2) t = testing::random_tree(2 + rng() % 25, rng);
    const Workload s = make_setup(t, 20, 120, 100 + static_cast<std::uint64_t>(trial));
    const HapodResult seq = run_hapod(s.tree, s.leaves, s.tol, {}, true);
    for (std::size_t workers : {1u, 2u, 3u, 8u}) {
      const auto [par, stats] = run_parallel(s.tree, s.leaves, s.tol, {}, workers, true);
      expect_same(par, seq);
      ASSERT_TRUE(par.right_factor.has_value());
      EXPECT_EQ(*par.right_factor, *seq.right_factor);
      EXPECT_LE(stats.critical_path_time, stats.sequential_time + 1e-12);
      EXPECT_LE(stats.peak_resident_modes, s.leaves.total_count());
    }
  }
}

TEST(RunParallel, StatsAreConsistent) {
  const Workload s = make_setup(build_balanced(16, 2), 60, 800, 10);
  const auto [r, stats] = run_parallel(s.tree, s.leaves, s.tol, {}, 4);
  ASSERT_EQ(stats.node_times.size(), s.tree.node_count());
  ASSERT_EQ(stats.wave_times.size(), 2u);
  double leaf_max = 0.0, total = 0.0;
  for (NodeId a = 0; a < s.tree.node_count(); ++a) {
    EXPECT_GE(stats.node_times[a], 0.0);
    total += stats.node_times[a];
    if (a != s.tree.root()) leaf_max = std::max(leaf_max, stats.node_times[a]);
  }
  EXPECT_NEAR(stats.sequential_time, total, 1e-9);
  EXPECT_NEAR(stats.critical_path_time, leaf_max + stats.node_times[s.tree.root()], 1e-9);
  // Sixteen comparable leaves: the slowest one is far below their sum.
  EXPECT_LT(stats.critical_path_time, stats.sequential_time);
  EXPECT_GT(stats.peak_resident_modes, 0u);
  EXPECT_LE(stats.peak_resident_modes, 800u);
}

TEST(RunParallel, PropagatesNodeFailure) {
  const RootedTree t = build_star(6);
  LeafAssignment leaves(InnerProductSpace(3));
  for (NodeId leaf = 1; leaf <= 6; ++leaf) {
    const double scale = leaf == 4 ? 1e200 : 1.0;
    leaves.assign(leaf, SnapshotBlock(InnerProductSpace(3), Matrix::Constant(3, 2, scale)));
  }
  ToleranceAssignment tol;
  tol.epsilon.assign(7, 0.1);
  for (std::size_t workers : {1u, 3u}) {
    EXPECT_THROW(run_parallel(t, leaves, tol, {}, workers), NumericalError);
  }
  EXPECT_THROW(run_parallel(t, leaves, tol, {}, 0), ParameterError);
}

}  // namespace
}  // namespace hapod
