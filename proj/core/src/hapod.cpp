#include "hapod/hapod.hpp"

#include "hapod/error.hpp"

#include <chrono>
#include <cmath>
#include <string>

namespace hapod {

LeafAssignment::LeafAssignment(InnerProductSpace space) : space_(std::move(space)) {}

void LeafAssignment::assign(NodeId leaf, SnapshotBlock block) {
  if (!(block.space() == space_)) {
    throw InputError("leaf " + std::to_string(leaf) + " block does not live in the assignment's space");
  }
  blocks_.insert_or_assign(leaf, std::move(block));
}

SnapshotBlock LeafAssignment::block(NodeId leaf) const {
  const auto it = blocks_.find(leaf);
  return it == blocks_.end() ? SnapshotBlock(space_) : it->second;
}

std::size_t LeafAssignment::count(NodeId leaf) const {
  const auto it = blocks_.find(leaf);
  return it == blocks_.end() ? 0 : static_cast<std::size_t>(it->second.count());
}

std::size_t LeafAssignment::total_count() const {
  std::size_t total = 0;
  for (const auto& [leaf, block] : blocks_) total += static_cast<std::size_t>(block.count());
  return total;
}

std::vector<std::size_t> LeafAssignment::counts(std::size_t node_count) const {
  std::vector<std::size_t> out(node_count, 0);
  for (const auto& [leaf, block] : blocks_) {
    if (leaf >= node_count) throw ParameterError("snapshots assigned to node " + std::to_string(leaf) + " outside the tree");
    out[leaf] = static_cast<std::size_t>(block.count());
  }
  return out;
}

LeafAssignment LeafAssignment::split(const RootedTree& tree, const SnapshotBlock& snapshots,
                                     std::span<const std::size_t> sizes) {
  const TreeMaps maps = derive_maps(tree);
  if (sizes.size() != maps.leaf_order.size()) {
    throw ParameterError("leaf split has " + std::to_string(sizes.size()) + " sizes for " +
                         std::to_string(maps.leaf_order.size()) + " leaves");
  }
  LeafAssignment out(snapshots.space());
  Index first = 0;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    const auto n = static_cast<Index>(sizes[i]);
    if (first + n > snapshots.count()) throw ParameterError("leaf split asks for more columns than available");
    out.assign(maps.leaf_order[i], snapshots.columns(first, n));
    first += n;
  }
  if (first != snapshots.count()) throw ParameterError("leaf split leaves columns unassigned");
  return out;
}

LeafAssignment LeafAssignment::split_uniform(const RootedTree& tree, const SnapshotBlock& snapshots) {
  const TreeMaps maps = derive_maps(tree);
  const std::size_t leaves = maps.leaf_order.size();
  const auto total = static_cast<std::size_t>(snapshots.count());
  std::vector<std::size_t> sizes(leaves, total / leaves);
  for (std::size_t i = 0; i < total % leaves; ++i) ++sizes[i];
  return split(tree, snapshots, sizes);
}

const NodeReport& HapodResult::report(NodeId node) const {
  for (const NodeReport& r : reports) {
    if (r.node == node) return r;
  }
  throw ParameterError("no report for node " + std::to_string(node));
}

NodeOutput evaluate_node(const RootedTree& tree, NodeId node, const LeafAssignment& leaves,
                         std::span<const NodeOutput* const> children, double epsilon,
                         std::size_t subordinate_count, const PodBackend& backend, bool track_right_factor) {
  const auto start = std::chrono::steady_clock::now();
  NodeReport report;
  report.node = node;
  report.subordinate_count = subordinate_count;
  report.local_epsilon = epsilon;

  PodResult res{ModeSet(leaves.space()), 0.0, Matrix()};
  Matrix right;
  if (tree.is_leaf(node)) {
    const SnapshotBlock block = leaves.block(node);
    report.input_count = static_cast<std::size_t>(block.count());
    res = pod_detailed(block, epsilon, backend, track_right_factor);
    if (track_right_factor) right = std::move(res.right_vectors);
  } else {
    if (children.size() != tree.children(node).size()) {
      throw ParameterError("node " + std::to_string(node) + " evaluated without all child outputs");
    }
    std::vector<const ModeSet*> parts;
    parts.reserve(children.size());
    for (const NodeOutput* c : children) {
      parts.push_back(&c->modes);
      report.input_count += static_cast<std::size_t>(c->modes.size());
    }
    res = merge_pod(parts, epsilon, backend, track_right_factor);
    if (track_right_factor) {
      // Accumulated right factor: blockdiag(child factors) * local right vectors.
      Index rows = 0;
      for (const NodeOutput* c : children) rows += c->right_factor.rows();
      right.resize(rows, res.modes.size());
      Index row = 0, col = 0;
      for (const NodeOutput* c : children) {
        const Index n_c = c->modes.size();
        right.middleRows(row, c->right_factor.rows()).noalias() =
            c->right_factor * res.right_vectors.middleRows(col, n_c);
        row += c->right_factor.rows();
        col += n_c;
      }
    }
  }

  report.output_mode_count = static_cast<std::size_t>(res.modes.size());
  report.discarded_tail_energy = res.discarded_energy;
  report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return NodeOutput{std::move(res.modes), std::move(right), report};
}

void check_run_inputs(const RootedTree& tree, const LeafAssignment& leaves, const ToleranceAssignment& tol) {
  require_valid(tree);
  if (tol.epsilon.size() != tree.node_count()) {
    throw ParameterError("tolerance map covers " + std::to_string(tol.epsilon.size()) + " nodes, tree has " +
                         std::to_string(tree.node_count()));
  }
  for (NodeId a = 0; a < tree.node_count(); ++a) {
    if (!(tol.epsilon[a] >= 0.0) || !std::isfinite(tol.epsilon[a])) {
      throw ParameterError("tolerance of node " + std::to_string(a) + " is not a finite nonnegative number");
    }
  }
  for (const auto& [leaf, block] : leaves.blocks()) {
    if (leaf >= tree.node_count() || !tree.is_leaf(leaf)) {
      throw ParameterError("snapshots assigned to node " + std::to_string(leaf) + ", which is not a leaf");
    }
  }
}

HapodResult run_hapod(const RootedTree& tree, const LeafAssignment& leaves, const ToleranceAssignment& tol,
                      const PodBackend& backend, bool track_right_factor) {
  check_run_inputs(tree, leaves, tol);
  const TreeMaps maps = derive_maps(tree);
  const std::vector<std::size_t> below = maps.subordinate_counts(leaves.counts(tree.node_count()));

  std::vector<std::optional<NodeOutput>> outputs(tree.node_count());
  HapodResult result{ModeSet(leaves.space()), 0.0, {}, std::nullopt};
  result.reports.reserve(tree.node_count());
  double squared_bound = 0.0;
  for (NodeId a : maps.postorder) {
    std::vector<const NodeOutput*> kids;
    for (NodeId c : tree.children(a)) kids.push_back(&*outputs[c]);
    outputs[a] = evaluate_node(tree, a, leaves, kids, tol[a], below[a], backend, track_right_factor);
    for (NodeId c : tree.children(a)) outputs[c].reset();
    result.reports.push_back(outputs[a]->report);
    squared_bound += tol[a] * tol[a];
  }

  NodeOutput& root = *outputs[tree.root()];
  result.modes = std::move(root.modes);
  result.apriori_error_bound = std::sqrt(squared_bound);
  if (track_right_factor) result.right_factor = std::move(root.right_factor);
  return result;
}

ProjectionErrorAccumulator::ProjectionErrorAccumulator(const ModeSet& modes) : space_(modes.space) {
  if (modes.orthonormal || modes.empty()) {
    basis_ = modes.modes;
    return;
  }
  // Passthrough modes are raw vectors; orthonormalize their span first.
  Eigen::ColPivHouseholderQR<Matrix> qr(space_.to_euclidean(modes.modes));
  const Index rank = qr.rank();
  Matrix q = qr.householderQ() * Matrix::Identity(space_.dim(), rank);
  basis_ = space_.from_euclidean(q);
}

void ProjectionErrorAccumulator::add(const Eigen::Ref<const Matrix>& columns) {
  if (columns.rows() != space_.dim()) throw InputError("projection error: column dimension does not match the modes");
  Matrix residual = columns;
  if (basis_.cols() > 0) residual.noalias() -= basis_ * space_.cross_gramian(basis_, columns);
  if (space_.weighted()) {
    total_ += (space_.weights().asDiagonal() * residual.cwiseAbs2()).sum();
  } else {
    total_ += residual.squaredNorm();
  }
  count_ += static_cast<std::size_t>(columns.cols());
}

double ProjectionErrorAccumulator::mean() const {
  return count_ == 0 ? 0.0 : total_ / static_cast<double>(count_);
}

double actual_mean_error(const SnapshotBlock& snapshots, const ModeSet& modes) {
  if (!(snapshots.space() == modes.space)) throw InputError("snapshots and modes live in different spaces");
  ProjectionErrorAccumulator acc(modes);
  acc.add(snapshots);
  return acc.mean();
}

}  // namespace hapod
