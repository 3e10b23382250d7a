#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hapod {

using NodeId = std::size_t;

/// Rooted tree over dense node ids 0..n-1 with ordered child lists.
///
/// Construction does not validate; call validate() (or use a builder, which
/// always produces valid trees).
class RootedTree {
 public:
  RootedTree(std::vector<std::vector<NodeId>> children, NodeId root);

  std::size_t node_count() const { return children_.size(); }
  NodeId root() const { return root_; }
  std::span<const NodeId> children(NodeId node) const { return children_.at(node); }
  bool is_leaf(NodeId node) const { return children_.at(node).empty(); }
  const std::vector<std::vector<NodeId>>& child_lists() const { return children_; }

  friend bool operator==(const RootedTree&, const RootedTree&) = default;

 private:
  std::vector<std::vector<NodeId>> children_;
  NodeId root_;
};

struct TreeViolation {
  enum class Kind {
    Empty,           ///< no nodes
    IdOutOfRange,    ///< root or child id >= node_count
    MultipleParents, ///< a node is the child of more than one node (or listed twice)
    RootHasParent,   ///< the root appears in a child list
    Unreachable,     ///< a node is not connected to the root
  };
  Kind kind;
  NodeId witness;
  std::string message;
};

/// Returns nothing for a valid rooted tree, otherwise the first violated
/// condition with a witness node.
std::optional<TreeViolation> validate(const RootedTree& tree);

/// Throws ParameterError with the violation message if the tree is invalid.
void require_valid(const RootedTree& tree);

/// Derived structure of a validated tree.
struct TreeMaps {
  std::vector<NodeId> leaves;               ///< ascending ids
  std::vector<NodeId> leaf_order;           ///< depth-first, children in list order
  std::vector<std::size_t> level;           ///< 1 for leaves, max(child)+1 otherwise
  std::size_t depth = 0;                    ///< level of the root
  std::vector<std::optional<NodeId>> parent;
  std::vector<NodeId> preorder;             ///< depth-first preorder from the root
  std::vector<NodeId> postorder;            ///< children before parents

  /// Nodes below `node` (including itself), as a contiguous preorder slice.
  std::span<const NodeId> nodes_below(NodeId node) const;

  /// Sums leaf counts upward; `leaf_counts` is indexed by node id and must be
  /// zero on interior nodes.
  std::vector<std::size_t> subordinate_counts(std::span<const std::size_t> leaf_counts) const;

 private:
  friend TreeMaps derive_maps(const RootedTree& tree);
  std::vector<std::size_t> preorder_pos_;
  std::vector<std::size_t> subtree_size_;
};

/// Throws ParameterError on an invalid tree.
TreeMaps derive_maps(const RootedTree& tree);

/// Root 0 with leaves 1..num_leaves.
RootedTree build_star(std::size_t num_leaves);

/// Totally unbalanced tree alpha_L -> {alpha_{L-1}, beta_{L-1}}, ..., alpha_1 a leaf.
/// Ids: alpha_l = 2 (L - l), beta_l = 2 (L - l) - 1. The depth-first leaf order is
/// alpha_1, beta_1, ..., beta_{L-1}.
RootedTree build_chain(std::size_t num_blocks);

/// Id of alpha_l / beta_l in build_chain(num_blocks).
NodeId chain_alpha(std::size_t num_blocks, std::size_t l);
NodeId chain_beta(std::size_t num_blocks, std::size_t l);

/// Smallest n with n^edges >= num_blocks, i.e. ceil(num_blocks^(1/edges)).
std::size_t balanced_arity(std::size_t num_blocks, std::size_t edges);

/// Balanced tree with `depth` levels (depth >= 2) and exactly `num_blocks`
/// leaves. Arity is balanced_arity(num_blocks, depth - 1); surplus leaves are
/// pruned right to left and interior nodes with a single child are spliced
/// out. Ids are assigned breadth-first, root 0.
RootedTree build_balanced(std::size_t num_blocks, std::size_t depth);

}  // namespace hapod
