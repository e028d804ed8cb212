#include "hck/partition.hpp"

#include "hck/rng.hpp"

#include <algorithm>
#include <cmath>

namespace hck {

int PartitionTree::num_leaves() const {
  int c = 0;
  for (const auto& nd : nodes) c += nd.is_leaf();
  return c;
}

int PartitionTree::depth() const {
  int best = 0;
  for (const auto& nd : nodes) {
    if (!nd.is_leaf()) continue;
    int d = 0;
    for (int id = nd.id; nodes[id].parent >= 0; id = nodes[id].parent) ++d;
    best = std::max(best, d);
  }
  return best;
}

IndexVec PartitionTree::leaf_ids() const {
  IndexVec out;
  for (const auto& nd : nodes)
    if (nd.is_leaf()) out.push_back(nd.id);
  return out;
}

IndexVec PartitionTree::node_points(int id) const {
  const TreeNode& nd = nodes[id];
  return IndexVec(perm.begin() + nd.lo, perm.begin() + nd.hi);
}

std::pair<int, int> levels_to_sizes(int n, int j) {
  require(n >= 1, "levels_to_sizes: n must be positive");
  require(j >= 0 && (1LL << j) <= n, "levels_to_sizes: level count out of range");
  const long long p = 1LL << j;
  const int n0 = static_cast<int>((n + p - 1) / p);
  const int r = static_cast<int>(n / p);
  return {n0, r};
}

namespace {

// single compiled code path for projections: construction and routing must
// round identically for the threshold rule to reproduce training assignment,
// so inlining (and per-site FMA contraction) is disabled
[[gnu::noinline]] double project(const double* dir, const double* x, int d) {
  double p = 0.0;
  for (int k = 0; k < d; ++k) p += dir[k] * x[k];
  return p;
}

struct Builder {
  const RowMatrix& points;
  PartitionTree& tree;
  int n0;
  int r;
  SplitMix64 master;
  std::vector<double> proj;  // scratch, indexed like perm

  // Splits perm[lo,hi): projections sorted ascending with original index as
  // the tie-break, left gets the first ceil(m/2). If equal projections
  // straddle the median the boundary moves to the nearest strict gap so that
  // threshold-based routing reproduces the assignment exactly.
  void build(int id, int parent, int lo, int hi) {
    TreeNode nd;
    nd.id = id;
    nd.parent = parent;
    nd.lo = lo;
    nd.hi = hi;
    tree.nodes[id] = std::move(nd);

    const int m = hi - lo;
    if (m <= n0) return;  // leaf

    SplitMix64 rng = master.substream(static_cast<std::uint64_t>(id));
    const int d = static_cast<int>(points.cols());
    VectorXd dir(d);
    for (int k = 0; k < d; ++k) dir[k] = rng.normal();
    double norm = dir.norm();
    if (norm == 0.0) dir[0] = norm = 1.0;
    dir /= norm;

    auto first = tree.perm.begin() + lo;
    auto last = tree.perm.begin() + hi;
    for (auto it = first; it != last; ++it)
      proj[*it] = project(dir.data(), points.row(*it).data(), d);
    std::sort(first, last, [&](int a, int b) {
      if (proj[a] != proj[b]) return proj[a] < proj[b];
      return a < b;
    });

    int nl = (m + 1) / 2;
    if (proj[*(first + nl - 1)] == proj[*(first + nl)]) {
      int lo_gap = nl, hi_gap = nl;
      while (lo_gap > 1 && proj[*(first + lo_gap - 1)] == proj[*(first + lo_gap)]) --lo_gap;
      while (hi_gap < m - 1 && proj[*(first + hi_gap - 1)] == proj[*(first + hi_gap)]) ++hi_gap;
      const bool lo_ok = lo_gap > 1 || proj[*first] != proj[*(first + 1)];
      const bool hi_ok = hi_gap < m - 1 || proj[*(last - 2)] != proj[*(last - 1)];
      if (!lo_ok && !hi_ok) return;  // all projections equal: keep as leaf
      if (!hi_ok || (lo_ok && nl - lo_gap <= hi_gap - nl))
        nl = lo_gap;
      else
        nl = hi_gap;
    }

    TreeNode& node = tree.nodes[id];
    node.direction = dir;
    node.threshold = proj[*(first + nl - 1)];

    const int k = std::min(r, m);
    IndexVec picks = rng.sample_without_replacement(m, k);
    node.landmarks.resize(k);
    for (int t = 0; t < k; ++t) node.landmarks[t] = tree.perm[lo + picks[t]];
    std::sort(node.landmarks.begin(), node.landmarks.end());

    // pre-order ids: the right child follows the whole left subtree
    const int left_id = id + 1;
    const int right_id = left_id + count_nodes(nl);
    node.left = left_id;
    node.right = right_id;
    build(left_id, id, lo, lo + nl);
    build(right_id, id, lo + nl, hi);
  }

  // Subtree node count is a function of the sizes alone.
  int count_nodes(int m) const {
    if (m <= n0) return 1;
    const int nl = (m + 1) / 2;
    return 1 + count_nodes(nl) + count_nodes(m - nl);
  }
};

}  // namespace

PartitionTree build_tree(const RowMatrix& points, int n0, int r, std::uint64_t seed) {
  const int n = static_cast<int>(points.rows());
  require(n >= 1, "build_tree: empty point set");
  require(n0 >= 1 && r >= 1, "build_tree: n0 and r must be positive");
  require(r <= n0, "build_tree: rank exceeds the leaf capacity");

  PartitionTree tree;
  tree.n0 = n0;
  tree.r = r;
  tree.seed = seed;
  tree.dim = static_cast<int>(points.cols());
  tree.perm.resize(n);
  for (int i = 0; i < n; ++i) tree.perm[i] = i;

  Builder b{points, tree, n0, r, SplitMix64(seed), std::vector<double>(n)};
  tree.nodes.resize(b.count_nodes(n));
  b.build(0, -1, 0, n);
  return tree;
}

IndexVec locate_leaf(const PartitionTree& tree, const double* x, int d) {
  require(d == tree.dim, "locate_leaf: dimension mismatch");
  IndexVec path;
  int id = 0;
  for (;;) {
    path.push_back(id);
    const TreeNode& nd = tree.nodes[id];
    if (nd.is_leaf()) return path;
    id = (project(nd.direction.data(), x, d) <= nd.threshold) ? nd.left : nd.right;
  }
}

IndexVec locate_leaf(const PartitionTree& tree, const Eigen::Ref<const VectorXd>& x) {
  return locate_leaf(tree, x.data(), static_cast<int>(x.size()));
}

double split_coordinate(const TreeNode& node, const double* x, int d) {
  require(!node.is_leaf(), "split_coordinate: leaf nodes have no split");
  require(d == node.direction.size(), "split_coordinate: dimension mismatch");
  return project(node.direction.data(), x, d);
}

}  // namespace hck
