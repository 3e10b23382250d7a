#pragma once

#include "hapod/pod.hpp"
#include "hapod/space.hpp"
#include "hapod/tolerance.hpp"
#include "hapod/tree.hpp"

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <vector>

namespace hapod {

/// Snapshots assigned to the leaves of a tree. Leaves without an entry hold
/// no snapshots.
class LeafAssignment {
 public:
  explicit LeafAssignment(InnerProductSpace space);

  /// Throws InputError when the block lives in a different space.
  void assign(NodeId leaf, SnapshotBlock block);

  const InnerProductSpace& space() const { return space_; }
  /// The block of `leaf`, or an empty block.
  SnapshotBlock block(NodeId leaf) const;
  std::size_t count(NodeId leaf) const;
  std::size_t total_count() const;
  /// Counts indexed by node id, sized to `node_count`.
  std::vector<std::size_t> counts(std::size_t node_count) const;
  const std::map<NodeId, SnapshotBlock>& blocks() const { return blocks_; }

  /// Cuts `snapshots` into contiguous column ranges, one per leaf in the
  /// depth-first leaf order, with sizes differing by at most one.
  static LeafAssignment split_uniform(const RootedTree& tree, const SnapshotBlock& snapshots);
  /// Same, with explicit per-leaf sizes given in depth-first leaf order.
  static LeafAssignment split(const RootedTree& tree, const SnapshotBlock& snapshots,
                              std::span<const std::size_t> sizes);

 private:
  InnerProductSpace space_;
  std::map<NodeId, SnapshotBlock> blocks_;
};

struct NodeReport {
  NodeId node = 0;
  std::size_t input_count = 0;        ///< |S_a|
  std::size_t subordinate_count = 0;  ///< |S~_a|
  double local_epsilon = 0.0;
  std::size_t output_mode_count = 0;  ///< N_a
  double discarded_tail_energy = 0.0;
  double wall_time = 0.0;             ///< seconds
};

struct HapodResult {
  ModeSet modes;
  /// sqrt(sum over all nodes of epsilon^2)
  double apriori_error_bound = 0.0;
  /// One entry per evaluated node, in evaluation order.
  std::vector<NodeReport> reports;
  /// |S| x N accumulated right singular vectors; rows follow the depth-first
  /// leaf order of the snapshots (see TreeMaps::leaf_order).
  std::optional<Matrix> right_factor;

  const NodeReport& report(NodeId node) const;
};

/// Output of a single node evaluation.
struct NodeOutput {
  ModeSet modes;
  Matrix right_factor;  ///< empty unless tracking
  NodeReport report;
};

/// Evaluates one node given its children's outputs (in child-list order).
/// Leaves read their block from `leaves`. Shared by the sequential and the
/// parallel drivers so both produce identical per-node inputs.
NodeOutput evaluate_node(const RootedTree& tree, NodeId node, const LeafAssignment& leaves,
                         std::span<const NodeOutput* const> children, double epsilon,
                         std::size_t subordinate_count, const PodBackend& backend,
                         bool track_right_factor);

/// Checks the inputs of a HAPOD run; throws ParameterError/InputError.
void check_run_inputs(const RootedTree& tree, const LeafAssignment& leaves,
                      const ToleranceAssignment& tol);

/// Sequential HAPOD over `tree`, evaluated in postorder.
HapodResult run_hapod(const RootedTree& tree, const LeafAssignment& leaves,
                      const ToleranceAssignment& tol, const PodBackend& backend = {},
                      bool track_right_factor = false);

/// Streams snapshot columns and accumulates sum ||s - P s||^2 for an orthonormal
/// (or passthrough, which is orthonormalized first) mode set.
class ProjectionErrorAccumulator {
 public:
  explicit ProjectionErrorAccumulator(const ModeSet& modes);

  void add(const Eigen::Ref<const Matrix>& columns);
  void add(const SnapshotBlock& block) { add(block.values()); }

  double total() const { return total_; }
  std::size_t count() const { return count_; }
  double mean() const;

 private:
  InnerProductSpace space_;
  Matrix basis_;  // W-orthonormal columns
  double total_ = 0.0;
  std::size_t count_ = 0;
};

/// (1/m) sum_j ||s_j - P s_j||^2 in the block's inner product.
double actual_mean_error(const SnapshotBlock& snapshots, const ModeSet& modes);

}  // namespace hapod
