#include "hapod/tolerance.hpp"

#include "hapod/error.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace hapod {

ToleranceAssignment assign_tolerances(const RootedTree& tree, std::span<const std::size_t> leaf_counts,
                                      double target, double omega, LeafPolicy leaf_policy) {
  if (!(target > 0.0) || !std::isfinite(target)) {
    throw ParameterError("target mean error must be a positive finite number, got " + std::to_string(target));
  }
  if (!(omega >= 0.0 && omega <= 1.0)) {
    throw ParameterError("omega must lie in [0, 1], got " + std::to_string(omega));
  }
  const TreeMaps maps = derive_maps(tree);
  const std::vector<std::size_t> below = maps.subordinate_counts(leaf_counts);
  const std::size_t total = below[tree.root()];
  if (total == 0) throw ParameterError("no snapshots are assigned to any leaf");
  if (maps.depth == 1 && omega < 1.0) {
    throw ParameterError("a single-node tree cannot split the error budget; use omega = 1 or a deeper tree");
  }

  ToleranceAssignment tol;
  tol.omega = omega;
  tol.target = target;
  tol.epsilon.assign(tree.node_count(), 0.0);
  const double interior_scale =
      maps.depth > 1 ? std::sqrt(1.0 - omega * omega) * target / std::sqrt(static_cast<double>(maps.depth - 1)) : 0.0;
  for (NodeId a = 0; a < tree.node_count(); ++a) {
    if (a == tree.root()) {
      tol.epsilon[a] = std::sqrt(static_cast<double>(total)) * omega * target;
    } else if (tree.is_leaf(a) && leaf_policy == LeafPolicy::Zero) {
      tol.epsilon[a] = 0.0;
    } else {
      tol.epsilon[a] = std::sqrt(static_cast<double>(below[a])) * interior_scale;
    }
  }
  return tol;
}

double error_bound(const RootedTree& tree, const ToleranceAssignment& tol, NodeId node) {
  const TreeMaps maps = derive_maps(tree);
  if (node >= tree.node_count()) throw ParameterError("node " + std::to_string(node) + " is not in the tree");
  if (tol.epsilon.size() != tree.node_count()) throw ParameterError("tolerance map does not cover the tree");
  double sum = 0.0;
  for (NodeId g : maps.nodes_below(node)) sum += tol.epsilon[g] * tol.epsilon[g];
  return std::sqrt(sum);
}

}  // namespace hapod
