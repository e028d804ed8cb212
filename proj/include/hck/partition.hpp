#pragma once

#include "hck/common.hpp"

#include <cstdint>
#include <utility>

namespace hck {

struct TreeNode {
  int id = -1;
  int parent = -1;
  int left = -1;   // child ids; both -1 for a leaf
  int right = -1;
  int lo = 0, hi = 0;  // [lo, hi) into the permutation
  VectorXd direction;  // unit normal of the splitting hyperplane (non-leaf)
  double threshold = 0.0;
  IndexVec landmarks;  // global training indices, subset of this node's range (non-leaf)

  bool is_leaf() const { return left < 0; }
  int size() const { return hi - lo; }
};

/// Balanced binary random-projection tree. Nodes are stored in pre-order;
/// each node's points are the contiguous slice perm[lo, hi).
struct PartitionTree {
  std::vector<TreeNode> nodes;
  IndexVec perm;
  int n0 = 0;
  int r = 0;
  std::uint64_t seed = 0;
  int dim = 0;

  int n() const { return static_cast<int>(perm.size()); }
  const TreeNode& root() const { return nodes.front(); }
  bool single_leaf() const { return nodes.size() == 1; }
  int num_leaves() const;
  int depth() const;  // edge count of the longest root-to-leaf path
  IndexVec leaf_ids() const;
  /// Global indices of a node's points.
  IndexVec node_points(int id) const;
};

/// Coupled sizing rule: j levels of halving give n0 = ceil(n/2^j) and
/// r = floor(n/2^j).
std::pair<int, int> levels_to_sizes(int n, int j);

PartitionTree build_tree(const RowMatrix& points, int n0, int r, std::uint64_t seed);

/// Root-to-leaf node ids for x; descends left iff the projected coordinate is
/// <= the node threshold.
IndexVec locate_leaf(const PartitionTree& tree, const double* x, int d);
IndexVec locate_leaf(const PartitionTree& tree, const Eigen::Ref<const VectorXd>& x);

/// x's coordinate along a node's split direction. Single compiled instance so
/// construction, routing, and callers agree to the bit.
double split_coordinate(const TreeNode& node, const double* x, int d);

}  // namespace hck
