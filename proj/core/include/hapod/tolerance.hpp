#pragma once

#include "hapod/tree.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace hapod {

/// How leaves are treated by assign_tolerances.
enum class LeafPolicy {
  Theorem,  ///< leaves get the non-root formula like every other node
  Zero,     ///< leaves pass their snapshots through unchanged (epsilon = 0)
};

/// Local POD tolerance for every node.
struct ToleranceAssignment {
  std::vector<double> epsilon;  ///< indexed by node id
  double omega = 0.75;
  double target = 0.0;          ///< mean l2 error target epsilon*

  double operator[](NodeId node) const { return epsilon.at(node); }
};

/// Tolerances guaranteeing a mean squared l2 error <= target^2:
///   root:      sqrt(|S|) * omega * target
///   otherwise: sqrt(|S~_a|) * (depth - 1)^(-1/2) * sqrt(1 - omega^2) * target
/// `leaf_counts` is indexed by node id and must vanish on interior nodes.
/// Throws ParameterError for target <= 0, omega outside [0, 1], all counts zero,
/// or a single-node tree combined with omega < 1.
ToleranceAssignment assign_tolerances(const RootedTree& tree, std::span<const std::size_t> leaf_counts,
                                      double target, double omega = 0.75,
                                      LeafPolicy leaf_policy = LeafPolicy::Theorem);

/// sqrt(sum of epsilon(g)^2 over the nodes below `node`).
double error_bound(const RootedTree& tree, const ToleranceAssignment& tol, NodeId node);

}  // namespace hapod
