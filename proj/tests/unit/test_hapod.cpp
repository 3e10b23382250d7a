#include "hapod/error.hpp"
#include "hapod/hapod.hpp"
#include "hapod/pod.hpp"
#include "hapod/tolerance.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

namespace hapod {
namespace {

using testing::oracle_pod_count;
using testing::oracle_projection_error;
using testing::random_decaying;
using testing::random_matrix;

SnapshotBlock euclidean(Matrix values) {
  const Index d = values.rows();
  return SnapshotBlock(InnerProductSpace(d), std::move(values));
}

std::vector<std::size_t> uniform_counts(const RootedTree& t, std::size_t per_leaf) {
  std::vector<std::size_t> counts(t.node_count(), 0);
  for (NodeId leaf : derive_maps(t).leaves) counts[leaf] = per_leaf;
  return counts;
}

// Concatenation of the leaf blocks below `node`.
SnapshotBlock subordinate_snapshots(const RootedTree& t, const TreeMaps& maps, const LeafAssignment& leaves,
                                    NodeId node) {
  SnapshotBlock out(leaves.space());
  for (NodeId leaf : maps.leaf_order) {
    const auto below = maps.nodes_below(node);
    if (std::find(below.begin(), below.end(), leaf) != below.end()) {
      out = SnapshotBlock::concat(out, leaves.block(leaf));
    }
  }
  (void)t;
  return out;
}

TEST(AssignTolerances, StarExample) {
  const RootedTree t = build_star(4);
  const auto tol = assign_tolerances(t, uniform_counts(t, 25), 0.1, 0.75);
  EXPECT_NEAR(tol[0], 0.75, 1e-12);
  for (NodeId leaf = 1; leaf <= 4; ++leaf) EXPECT_NEAR(tol[leaf], 0.330719, 1e-6);
  EXPECT_DOUBLE_EQ(tol.omega, 0.75);
  EXPECT_DOUBLE_EQ(tol.target, 0.1);
}

TEST(AssignTolerances, OmegaOneConcentratesOnRoot) {
  const RootedTree t = build_balanced(9, 3);
  const auto tol = assign_tolerances(t, uniform_counts(t, 4), 0.2, 1.0);
  EXPECT_NEAR(tol[t.root()], 6.0 * 0.2, 1e-12);
  for (NodeId a = 0; a < t.node_count(); ++a) {
    if (a != t.root()) EXPECT_EQ(tol[a], 0.0);
  }
}

TEST(AssignTolerances, ChainExample) {
  const RootedTree t = build_chain(3);
  const auto tol = assign_tolerances(t, uniform_counts(t, 10), 1.0, 0.0);
  EXPECT_EQ(tol[t.root()], 0.0);
  EXPECT_NEAR(tol[chain_alpha(3, 2)], std::sqrt(10.0), 1e-12);
  EXPECT_NEAR(tol[chain_beta(3, 1)], std::sqrt(5.0), 1e-12);
  const auto zero = assign_tolerances(t, uniform_counts(t, 10), 1.0, 0.0, LeafPolicy::Zero);
  EXPECT_EQ(zero[chain_beta(3, 1)], 0.0);
  EXPECT_EQ(zero[chain_alpha(3, 1)], 0.0);
  EXPECT_NEAR(zero[chain_alpha(3, 2)], std::sqrt(10.0), 1e-12);
}

TEST(AssignTolerances, RejectsBadParameters) {
  const RootedTree single({{}}, 0);
  const std::vector<std::size_t> one{5};
  EXPECT_THROW(assign_tolerances(single, one, 0.1, 0.75), ParameterError);
  EXPECT_NEAR(assign_tolerances(single, one, 0.1, 1.0)[0], std::sqrt(5.0) * 0.1, 1e-15);
  const RootedTree star = build_star(2);
  EXPECT_THROW(assign_tolerances(star, uniform_counts(star, 1), 0.0), ParameterError);
  EXPECT_THROW(assign_tolerances(star, uniform_counts(star, 1), 0.1, 1.5), ParameterError);
  EXPECT_THROW(assign_tolerances(star, uniform_counts(star, 1), 0.1, -0.1), ParameterError);
  EXPECT_THROW(assign_tolerances(star, uniform_counts(star, 0), 0.1), ParameterError);
}

TEST(ErrorBound, Examples) {
  const RootedTree single({{}}, 0);
  ToleranceAssignment s;
  s.epsilon = {0.4};
  EXPECT_DOUBLE_EQ(error_bound(single, s, 0), 0.4);

  const RootedTree t = build_star(4);
  const auto tol = assign_tolerances(t, uniform_counts(t, 25), 0.1, 0.75);
  // Telescopes to sqrt(|S|) * target.
  EXPECT_NEAR(error_bound(t, tol, t.root()), 1.0, 1e-12);
  EXPECT_NEAR(error_bound(t, tol, 1), tol[1], 1e-15);

  ToleranceAssignment zero;
  zero.epsilon.assign(t.node_count(), 0.0);
  EXPECT_EQ(error_bound(t, zero, t.root()), 0.0);
}

TEST(ErrorBound, TelescopesForEveryTree) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    const RootedTree t = testing::random_tree(2 + rng() % 30, rng);
    std::vector<std::size_t> counts(t.node_count(), 0);
    std::size_t total = 0;
    for (NodeId leaf : derive_maps(t).leaves) total += counts[leaf] = 1 + rng() % 20;
    const double target = 0.3;
    const auto tol = assign_tolerances(t, counts, target, 0.6);
    const double bound = error_bound(t, tol, t.root());
    EXPECT_LE(bound * bound, static_cast<double>(total) * target * target * (1 + 1e-12));
  }
}

TEST(ActualMeanError, Examples) {
  std::mt19937_64 rng(9);
  const SnapshotBlock block = euclidean(random_matrix(8, 5, rng));
  const ModeSet full = pod(block, 1e-14);
  EXPECT_LE(actual_mean_error(block, full), 1e-10);
  const ModeSet none(block.space());
  EXPECT_NEAR(actual_mean_error(block, none), block.total_energy() / 5.0, 1e-12);
  const ModeSet part = pod(block, 1.0);
  EXPECT_NEAR(actual_mean_error(block, part), oracle_projection_error(block, part.modes) / 5.0, 1e-12);
  // Passthrough modes spanning the snapshots also give zero error.
  EXPECT_LE(actual_mean_error(block, as_passthrough(block)), 1e-10);
  EXPECT_THROW(actual_mean_error(block, ModeSet(InnerProductSpace(9))), InputError);
}

TEST(ActualMeanError, WeightedMatchesResidualColumns) {
  std::mt19937_64 rng(10);
  Vector w = Vector::LinSpaced(12, 0.1, 2.0);
  const SnapshotBlock block(InnerProductSpace(w), random_matrix(12, 7, rng));
  const ModeSet part = pod(block, 0.8);
  EXPECT_NEAR(actual_mean_error(block, part), oracle_projection_error(block, part.modes) / 7.0, 1e-12);
}

TEST(RunHapod, SingleNodeEqualsPod) {
  std::mt19937_64 rng(12);
  const SnapshotBlock block = euclidean(random_decaying(20, 30, 0.3, rng));
  const RootedTree t({{}}, 0);
  LeafAssignment leaves(block.space());
  leaves.assign(0, block);
  const auto tol = assign_tolerances(t, leaves.counts(1), 0.01, 1.0);
  const HapodResult r = run_hapod(t, leaves, tol);
  const ModeSet direct = pod(block, tol[0]);
  ASSERT_EQ(r.modes.size(), direct.size());
  EXPECT_LE((r.modes.sigmas - direct.sigmas).cwiseAbs().maxCoeff(), 1e-12 * direct.sigmas[0]);
  EXPECT_LE(testing::span_distance(r.modes.modes, direct.modes), 1e-10);
  EXPECT_DOUBLE_EQ(r.apriori_error_bound, tol[0]);
  ASSERT_EQ(r.reports.size(), 1u);
  EXPECT_EQ(r.reports[0].input_count, 30u);
}

TEST(RunHapod, ChainMatchesIncrementalFormula) {
  std::mt19937_64 rng(13);
  const std::size_t blocks = 5;
  const SnapshotBlock all = euclidean(random_decaying(25, 50, 0.2, rng));
  const RootedTree t = build_chain(blocks);
  const LeafAssignment leaves = LeafAssignment::split_uniform(t, all);
  const auto tol = assign_tolerances(t, leaves.counts(t.node_count()), 0.02, 0.75, LeafPolicy::Zero);
  const HapodResult r = run_hapod(t, leaves, tol);

  // Fold the blocks in leaf order: POD(scaled previous modes | next block).
  SnapshotBlock current = all.columns(0, 10);
  for (std::size_t l = 2; l <= blocks; ++l) {
    const SnapshotBlock next = all.columns(static_cast<Index>(10 * (l - 1)), 10);
    const ModeSet merged = pod(SnapshotBlock::concat(current, next), tol[chain_alpha(blocks, l)]);
    current = SnapshotBlock(all.space(), merged.scaled_modes());
  }
  const ModeSet expected = pod(current, 1e-300);
  ASSERT_EQ(r.modes.size(), expected.size());
  EXPECT_LE(testing::spectrum_gap(r.modes.sigmas, expected.sigmas), 1e-9);
}

TEST(RunHapod, StarMatchesDistributedFormula) {
  std::mt19937_64 rng(14);
  const SnapshotBlock all = euclidean(random_decaying(30, 60, 0.15, rng));
  const RootedTree t = build_star(6);
  const LeafAssignment leaves = LeafAssignment::split_uniform(t, all);
  const auto tol = assign_tolerances(t, leaves.counts(t.node_count()), 0.02, 0.75);
  const HapodResult r = run_hapod(t, leaves, tol);

  SnapshotBlock gathered(all.space());
  for (NodeId leaf = 1; leaf <= 6; ++leaf) {
    gathered = SnapshotBlock::concat(gathered, SnapshotBlock(all.space(), pod(leaves.block(leaf), tol[leaf]).scaled_modes()));
  }
  const ModeSet expected = pod(gathered, tol[0]);
  ASSERT_EQ(r.modes.size(), expected.size());
  EXPECT_LE(testing::spectrum_gap(r.modes.sigmas, expected.sigmas), 1e-9);
  EXPECT_LE(testing::span_distance(r.modes.modes, expected.modes), 1e-6);
}

TEST(RunHapod, RandomStarMeetsTargetAndModeBound) {
  std::mt19937_64 rng(15);
  const SnapshotBlock all = euclidean(random_matrix(30, 60, rng));
  const RootedTree t = build_star(6);
  const LeafAssignment leaves = LeafAssignment::split_uniform(t, all);
  const double target = 0.05, omega = 0.75;
  const auto tol = assign_tolerances(t, leaves.counts(t.node_count()), target, omega);
  for (PodMethod method : {PodMethod::MethodOfSnapshots, PodMethod::DirectSvd}) {
    const HapodResult r = run_hapod(t, leaves, tol, PodBackend{method});
    EXPECT_LE(actual_mean_error(all, r.modes), target * target);
    EXPECT_LE(static_cast<std::size_t>(r.modes.size()), oracle_pod_count(all, std::sqrt(60.0) * omega * target));
  }
}

struct Scenario {
  RootedTree tree;
  LeafAssignment leaves;
  SnapshotBlock all;
};

Scenario random_scenario(std::mt19937_64& rng, bool weighted) {
  RootedTree t = testing::random_tree(2 + rng() % 14, rng);
  while (derive_maps(t).depth < 2) t = testing::random_tree(2 + rng() % 14, rng);
  const TreeMaps maps = derive_maps(t);
  const Index d = 10 + static_cast<Index>(rng() % 30);
  std::vector<std::size_t> sizes;
  std::size_t total = 0;
  for (std::size_t i = 0; i < maps.leaf_order.size(); ++i) {
    sizes.push_back(1 + rng() % 12);
    total += sizes.back();
  }
  std::uniform_real_distribution<double> rate(0.05, 0.6), weight(0.3, 3.0);
  InnerProductSpace space(d);
  if (weighted) {
    Vector w(d);
    for (Index i = 0; i < d; ++i) w[i] = weight(rng);
    space = InnerProductSpace(w);
  }
  SnapshotBlock all(space, random_decaying(d, static_cast<Index>(total), rate(rng), rng));
  LeafAssignment leaves = LeafAssignment::split(t, all, sizes);
  return {std::move(t), std::move(leaves), std::move(all)};
}

class TheoremProperties : public ::testing::TestWithParam<std::tuple<PodMethod, LeafPolicy>> {};

TEST_P(TheoremProperties, BoundsHoldOnRandomTrees) {
  const auto [method, policy] = GetParam();
  std::mt19937_64 rng(100 + static_cast<unsigned>(method) * 10 + static_cast<unsigned>(policy));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 40; ++trial) {
    const Scenario sc = random_scenario(rng, trial % 3 == 0);
    const TreeMaps maps = derive_maps(sc.tree);
    const double energy = sc.all.total_energy();
    const double target = (0.02 + 0.3 * unit(rng)) * std::sqrt(energy / static_cast<double>(sc.all.count()));
    const double omega = std::vector<double>{0.1, 0.5, 0.75, 0.9, 0.999, 1.0}[trial % 6];
    const auto tol = assign_tolerances(sc.tree, sc.leaves.counts(sc.tree.node_count()), target, omega, policy);
    const HapodResult r = run_hapod(sc.tree, sc.leaves, tol, PodBackend{method}, true);

    double sum_eps2 = 0.0;
    for (double e : tol.epsilon) sum_eps2 += e * e;
    EXPECT_NEAR(r.apriori_error_bound, std::sqrt(sum_eps2), 1e-12 * (1 + std::sqrt(sum_eps2)));

    // Error bound and tolerance selection.
    const double total_err = actual_mean_error(sc.all, r.modes) * static_cast<double>(sc.all.count());
    EXPECT_LE(total_err, sum_eps2 + 1e-8 * energy);
    EXPECT_LE(total_err / static_cast<double>(sc.all.count()), target * target * (1 + 1e-8) + 1e-8 * energy);
    const std::size_t root_count = static_cast<std::size_t>(r.modes.size());
    EXPECT_LE(root_count, oracle_pod_count(sc.all, tol[sc.tree.root()]));

    // Mode bound at every node, and the local bound for non-root nodes.
    const double local_scale = std::sqrt(1 - omega * omega) * target / std::sqrt(static_cast<double>(maps.depth - 1));
    for (const NodeReport& rep : r.reports) {
      const SnapshotBlock below = subordinate_snapshots(sc.tree, maps, sc.leaves, rep.node);
      EXPECT_EQ(rep.subordinate_count, static_cast<std::size_t>(below.count()));
      EXPECT_LE(rep.output_mode_count, oracle_pod_count(below, tol[rep.node])) << "node " << rep.node;
      EXPECT_LE(rep.discarded_tail_energy, tol[rep.node] * tol[rep.node] + 1e-10 * energy);
      if (policy == LeafPolicy::Theorem && rep.node != sc.tree.root()) {
        const double local = std::sqrt(static_cast<double>(below.count())) * local_scale;
        EXPECT_LE(rep.output_mode_count, oracle_pod_count(below, local));
      }
    }

    // Right factor: rows follow the depth-first leaf order, which is the split order.
    ASSERT_TRUE(r.right_factor.has_value());
    const Matrix& lam = *r.right_factor;
    ASSERT_EQ(lam.rows(), sc.all.count());
    ASSERT_EQ(lam.cols(), r.modes.size());
    if (r.modes.orthonormal && lam.cols() > 0) {
      const Matrix gram = lam.transpose() * lam;
      EXPECT_LE((gram - Matrix::Identity(lam.cols(), lam.cols())).cwiseAbs().maxCoeff(), 1e-8);
    }
    const Matrix residual = sc.all.space().to_euclidean(sc.all.values() - r.modes.scaled_modes() * lam.transpose());
    EXPECT_LE(residual.squaredNorm(), sum_eps2 + 1e-8 * energy);
  }
}

INSTANTIATE_TEST_SUITE_P(Backends, TheoremProperties,
                         ::testing::Combine(::testing::Values(PodMethod::MethodOfSnapshots, PodMethod::DirectSvd),
                                            ::testing::Values(LeafPolicy::Theorem, LeafPolicy::Zero)));

TEST(RunHapod, OmegaBoundIsMonotone) {
  std::mt19937_64 rng(16);
  const SnapshotBlock all = euclidean(random_decaying(40, 200, 0.1, rng));
  const RootedTree t = build_balanced(8, 3);
  const LeafAssignment leaves = LeafAssignment::split_uniform(t, all);
  const double target = 0.01;
  std::size_t previous_bound = std::numeric_limits<std::size_t>::max();
  for (double omega : {0.1, 0.5, 0.9, 0.999}) {
    const auto tol = assign_tolerances(t, leaves.counts(t.node_count()), target, omega);
    const HapodResult r = run_hapod(t, leaves, tol);
    const std::size_t bound = oracle_pod_count(all, std::sqrt(200.0) * omega * target);
    EXPECT_LE(bound, previous_bound);
    EXPECT_LE(static_cast<std::size_t>(r.modes.size()), bound);
    previous_bound = bound;
  }
}

TEST(RunHapod, WeightedEqualsScaledEuclidean) {
  std::mt19937_64 rng(17);
  Vector w = Vector::LinSpaced(20, 0.5, 2.5);
  const Matrix values = random_decaying(20, 40, 0.2, rng);
  const SnapshotBlock weighted(InnerProductSpace(w), values);
  const SnapshotBlock scaled = euclidean(w.cwiseSqrt().asDiagonal() * values);
  const RootedTree t = build_balanced(4, 3);
  const auto lw = LeafAssignment::split_uniform(t, weighted);
  const auto le = LeafAssignment::split_uniform(t, scaled);
  const auto tol = assign_tolerances(t, lw.counts(t.node_count()), 0.01);
  const HapodResult a = run_hapod(t, lw, tol);
  const HapodResult b = run_hapod(t, le, tol);
  ASSERT_EQ(a.modes.size(), b.modes.size());
  EXPECT_LE(testing::spectrum_gap(a.modes.sigmas, b.modes.sigmas), 1e-10);
}

TEST(RunHapod, EmptyChildrenGiveEmptyModes) {
  const RootedTree t = build_star(3);
  LeafAssignment leaves(InnerProductSpace(5));
  leaves.assign(1, euclidean(Matrix::Zero(5, 4)));
  const auto tol = assign_tolerances(t, leaves.counts(4), 0.1);
  const HapodResult r = run_hapod(t, leaves, tol);
  EXPECT_TRUE(r.modes.empty());
  EXPECT_EQ(r.report(0).output_mode_count, 0u);
  EXPECT_EQ(r.report(2).input_count, 0u);
  EXPECT_EQ(r.report(1).subordinate_count, 4u);
}

TEST(RunHapod, RejectsInconsistentInputs) {
  const RootedTree t = build_star(2);
  LeafAssignment leaves(InnerProductSpace(3));
  EXPECT_THROW(leaves.assign(1, euclidean(Matrix::Ones(4, 2))), InputError);
  leaves.assign(1, euclidean(Matrix::Ones(3, 2)));
  ToleranceAssignment short_tol;
  short_tol.epsilon = {0.1, 0.1};
  EXPECT_THROW(run_hapod(t, leaves, short_tol), ParameterError);

  LeafAssignment interior(InnerProductSpace(3));
  interior.assign(0, euclidean(Matrix::Ones(3, 2)));
  ToleranceAssignment tol;
  tol.epsilon = {0.1, 0.1, 0.1};
  EXPECT_THROW(run_hapod(t, interior, tol), ParameterError);
  const HapodResult empty{ModeSet(InnerProductSpace(3)), 0.0, {}, std::nullopt};
  EXPECT_THROW(empty.report(0), ParameterError);
}

TEST(LeafAssignment, SplitFollowsLeafOrder) {
  Matrix v(1, 10);
  for (Index j = 0; j < 10; ++j) v(0, j) = static_cast<double>(j);
  const SnapshotBlock all = euclidean(v);
  const RootedTree chain = build_chain(3);
  const LeafAssignment leaves = LeafAssignment::split_uniform(chain, all);
  EXPECT_EQ(leaves.count(chain_alpha(3, 1)), 4u);
  EXPECT_EQ(leaves.count(chain_beta(3, 1)), 3u);
  EXPECT_EQ(leaves.count(chain_beta(3, 2)), 3u);
  EXPECT_EQ(leaves.block(chain_beta(3, 1)).values()(0, 0), 4.0);
  EXPECT_EQ(leaves.total_count(), 10u);
  const std::vector<std::size_t> bad{5, 5};
  EXPECT_THROW(LeafAssignment::split(chain, all, bad), ParameterError);
}

}  // namespace
}  // namespace hapod
