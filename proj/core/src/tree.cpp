#include "hapod/tree.hpp"

#include "hapod/error.hpp"

#include <algorithm>
#include <deque>
#include <string>

namespace hapod {

RootedTree::RootedTree(std::vector<std::vector<NodeId>> children, NodeId root)
    : children_(std::move(children)), root_(root) {}

std::optional<TreeViolation> validate(const RootedTree& tree) {
  using Kind = TreeViolation::Kind;
  const std::size_t n = tree.node_count();
  if (n == 0) return TreeViolation{Kind::Empty, 0, "tree has no nodes"};
  if (tree.root() >= n) {
    return TreeViolation{Kind::IdOutOfRange, tree.root(), "root id " + std::to_string(tree.root()) + " out of range"};
  }

  std::vector<std::optional<NodeId>> parent(n);
  for (NodeId a = 0; a < n; ++a) {
    for (NodeId c : tree.children(a)) {
      if (c >= n) {
        return TreeViolation{Kind::IdOutOfRange, a,
                             "node " + std::to_string(a) + " lists child id " + std::to_string(c) + " out of range"};
      }
      if (c == tree.root()) {
        return TreeViolation{Kind::RootHasParent, c,
                             "root " + std::to_string(c) + " is listed as a child of node " + std::to_string(a)};
      }
      if (parent[c]) {
        return TreeViolation{Kind::MultipleParents, c,
                             "node " + std::to_string(c) + " is a child of both " + std::to_string(*parent[c]) +
                                 " and " + std::to_string(a) + " (single-parent condition)"};
      }
      parent[c] = a;
    }
  }

  // With unique parents and a parentless root, reachability rules out cycles.
  std::vector<char> seen(n, 0);
  std::deque<NodeId> queue{tree.root()};
  seen[tree.root()] = 1;
  while (!queue.empty()) {
    const NodeId a = queue.front();
    queue.pop_front();
    for (NodeId c : tree.children(a)) {
      if (!seen[c]) {
        seen[c] = 1;
        queue.push_back(c);
      }
    }
  }
  for (NodeId a = 0; a < n; ++a) {
    if (!seen[a]) {
      return TreeViolation{Kind::Unreachable, a,
                           "node " + std::to_string(a) + " is not connected to the root (connectivity condition)"};
    }
  }
  return std::nullopt;
}

void require_valid(const RootedTree& tree) {
  if (auto v = validate(tree)) throw ParameterError("invalid tree: " + v->message);
}

std::span<const NodeId> TreeMaps::nodes_below(NodeId node) const {
  return std::span<const NodeId>(preorder).subspan(preorder_pos_.at(node), subtree_size_.at(node));
}

std::vector<std::size_t> TreeMaps::subordinate_counts(std::span<const std::size_t> leaf_counts) const {
  const std::size_t n = level.size();
  if (leaf_counts.size() != n) {
    throw ParameterError("leaf count vector has " + std::to_string(leaf_counts.size()) + " entries for " +
                         std::to_string(n) + " nodes");
  }
  std::vector<std::size_t> out(n, 0);
  for (NodeId a : postorder) {
    if (level[a] == 1) {
      out[a] = leaf_counts[a];
    } else if (leaf_counts[a] != 0) {
      throw ParameterError("interior node " + std::to_string(a) + " was given snapshots");
    }
    if (parent[a]) out[*parent[a]] += out[a];
  }
  return out;
}

TreeMaps derive_maps(const RootedTree& tree) {
  require_valid(tree);
  const std::size_t n = tree.node_count();
  TreeMaps maps;
  maps.level.assign(n, 0);
  maps.parent.assign(n, std::nullopt);
  maps.preorder_pos_.assign(n, 0);
  maps.subtree_size_.assign(n, 1);
  maps.preorder.reserve(n);
  maps.postorder.reserve(n);

  for (NodeId a = 0; a < n; ++a) {
    for (NodeId c : tree.children(a)) maps.parent[c] = a;
    if (tree.is_leaf(a)) maps.leaves.push_back(a);
  }

  // Iterative DFS; the explicit stack keeps deep chains off the call stack.
  struct Frame {
    NodeId node;
    std::size_t next_child;
  };
  std::vector<Frame> stack{{tree.root(), 0}};
  maps.preorder_pos_[tree.root()] = 0;
  maps.preorder.push_back(tree.root());
  while (!stack.empty()) {
    Frame& top = stack.back();
    const auto kids = tree.children(top.node);
    if (top.next_child < kids.size()) {
      const NodeId c = kids[top.next_child++];
      maps.preorder_pos_[c] = maps.preorder.size();
      maps.preorder.push_back(c);
      stack.push_back({c, 0});
      continue;
    }
    const NodeId a = top.node;
    stack.pop_back();
    std::size_t lvl = 0;
    for (NodeId c : kids) {
      lvl = std::max(lvl, maps.level[c]);
      maps.subtree_size_[a] += maps.subtree_size_[c];
    }
    maps.level[a] = lvl + 1;
    if (kids.empty()) maps.leaf_order.push_back(a);
    maps.postorder.push_back(a);
  }
  maps.depth = maps.level[tree.root()];
  return maps;
}

RootedTree build_star(std::size_t num_leaves) {
  if (num_leaves < 1) throw ParameterError("star tree needs at least one leaf");
  std::vector<std::vector<NodeId>> children(num_leaves + 1);
  for (NodeId i = 1; i <= num_leaves; ++i) children[0].push_back(i);
  return RootedTree(std::move(children), 0);
}

NodeId chain_alpha(std::size_t num_blocks, std::size_t l) {
  if (l < 1 || l > num_blocks) throw ParameterError("chain alpha index out of range");
  return 2 * (num_blocks - l);
}

NodeId chain_beta(std::size_t num_blocks, std::size_t l) {
  if (l < 1 || l >= num_blocks) throw ParameterError("chain beta index out of range");
  return 2 * (num_blocks - l) - 1;
}

RootedTree build_chain(std::size_t num_blocks) {
  if (num_blocks < 1) throw ParameterError("chain tree needs at least one block");
  std::vector<std::vector<NodeId>> children(2 * num_blocks - 1);
  for (std::size_t l = 2; l <= num_blocks; ++l) {
    children[chain_alpha(num_blocks, l)] = {chain_alpha(num_blocks, l - 1), chain_beta(num_blocks, l - 1)};
  }
  return RootedTree(std::move(children), chain_alpha(num_blocks, num_blocks));
}

std::size_t balanced_arity(std::size_t num_blocks, std::size_t edges) {
  if (num_blocks < 1) throw ParameterError("balanced tree needs at least one block");
  if (edges < 1) throw ParameterError("balanced tree needs at least one level below the root");
  // Exact integer search; pow() rounding would misplace perfect powers.
  auto reaches = [&](std::size_t n) {
    std::size_t p = 1;
    for (std::size_t i = 0; i < edges; ++i) {
      if (p >= num_blocks) return true;
      p *= n;
    }
    return p >= num_blocks;
  };
  std::size_t n = 1;
  while (!reaches(n)) ++n;
  return n;
}

RootedTree build_balanced(std::size_t num_blocks, std::size_t depth) {
  if (depth < 2) throw ParameterError("balanced tree depth must be >= 2, got " + std::to_string(depth));
  const std::size_t arity = balanced_arity(num_blocks, depth - 1);

  // Build level by level, left to right, creating only the leftmost
  // num_blocks leaves; this is the full tree with surplus leaves pruned from
  // the right and emptied interior nodes removed.
  struct Proto {
    std::vector<std::size_t> kids;
  };
  std::vector<Proto> nodes(1);
  std::vector<std::size_t> frontier{0};
  std::size_t capacity = 1;  // leaves reachable below one node of the current level
  for (std::size_t i = 0; i + 1 < depth; ++i) capacity *= arity;
  std::vector<std::size_t> quota{num_blocks};
  for (std::size_t lvl = 1; lvl < depth; ++lvl) {
    capacity /= arity;
    std::vector<std::size_t> next, next_quota;
    for (std::size_t f = 0; f < frontier.size(); ++f) {
      std::size_t remaining = quota[f];
      for (std::size_t k = 0; k < arity && remaining > 0; ++k) {
        const std::size_t take = std::min(remaining, capacity);
        remaining -= take;
        nodes[frontier[f]].kids.push_back(nodes.size());
        next.push_back(nodes.size());
        next_quota.push_back(take);
        nodes.emplace_back();
      }
    }
    frontier = std::move(next);
    quota = std::move(next_quota);
  }

  // Splice out interior nodes with a single child. The root keeps a single
  // leaf child only when that is all there is.
  auto collapse = [&](std::size_t a) {
    while (nodes[a].kids.size() == 1 && !nodes[nodes[a].kids[0]].kids.empty()) {
      nodes[a].kids = nodes[nodes[a].kids[0]].kids;
    }
  };
  std::vector<std::size_t> order{0};
  for (std::size_t i = 0; i < order.size(); ++i) {
    collapse(order[i]);
    for (std::size_t& c : nodes[order[i]].kids) {
      collapse(c);
      // A non-root node left with one leaf child is replaced by that leaf.
      if (nodes[c].kids.size() == 1) c = nodes[c].kids[0];
      order.push_back(c);
    }
  }

  // Renumber breadth-first.
  std::vector<std::size_t> new_id(nodes.size(), 0);
  for (std::size_t i = 0; i < order.size(); ++i) new_id[order[i]] = i;
  std::vector<std::vector<NodeId>> children(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    for (std::size_t c : nodes[order[i]].kids) children[i].push_back(new_id[c]);
  }
  return RootedTree(std::move(children), 0);
}

}  // namespace hapod
