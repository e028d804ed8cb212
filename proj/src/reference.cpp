#include "hck/reference.hpp"

#include <optional>

namespace hck::reference {

namespace {

// A point either carries a training identity (jitter applies against matching
// indices) or is a raw out-of-sample location.
struct PointRef {
  const double* coords;
  int index;  // -1 for out-of-sample
};

struct Oracle {
  const PartitionTree& tree;
  const RowMatrix& points;
  const KernelSpec& spec;
  std::vector<Eigen::PartialPivLU<MatrixXd>> gram_lu;  // per nonleaf node
  std::vector<int> leaf_of;                            // per training point

  Oracle(const PartitionTree& t, const RowMatrix& p, const KernelSpec& s)
      : tree(t), points(p), spec(s) {
    gram_lu.resize(tree.nodes.size());
    for (const TreeNode& nd : tree.nodes)
      if (!nd.is_leaf())
        gram_lu[nd.id] = Eigen::PartialPivLU<MatrixXd>(kernel_gram(spec, points, nd.landmarks));
    leaf_of.assign(tree.n(), -1);
    for (const TreeNode& nd : tree.nodes)
      if (nd.is_leaf())
        for (int t2 = nd.lo; t2 < nd.hi; ++t2) leaf_of[tree.perm[t2]] = nd.id;
  }

  double kval(const PointRef& a, int train_b) const {
    double v = kernel_base(spec, a.coords, points.row(train_b).data(),
                           static_cast<int>(points.cols()));
    if (a.index >= 0 && a.index == train_b) v += spec.jitter;
    return v;
  }

  VectorXd kcol(const PointRef& a, const IndexVec& idx) const {
    VectorXd v(idx.size());
    for (size_t t = 0; t < idx.size(); ++t) v[t] = kval(a, idx[t]);
    return v;
  }

  int leaf_for(const PointRef& a) const {
    if (a.index >= 0) return leaf_of[a.index];
    return locate_leaf(tree, a.coords, static_cast<int>(points.cols())).back();
  }

  // psi(node, x) = K(L_node, L_child) K(L_child, L_child)^-1 ... k(L_first, x)
  // following the path from the leaf holding x up to `node`.
  VectorXd psi(int node, const PointRef& a) const {
    const int leaf = leaf_for(a);
    int cur = tree.nodes[leaf].parent;
    VectorXd v = kcol(a, tree.nodes[cur].landmarks);
    while (cur != node) {
      const int up = tree.nodes[cur].parent;
      VectorXd solved = gram_lu[cur].solve(v);
      v = kernel_cross(spec, points, tree.nodes[up].landmarks, tree.nodes[cur].landmarks) * solved;
      cur = up;
    }
    return v;
  }

  int lca(int leaf_a, int leaf_b) const {
    int id = 0;
    while (id != leaf_a && id != leaf_b) {
      const TreeNode& nd = tree.nodes[id];
      const bool a_left = lies_in(leaf_a, nd.left);
      const bool b_left = lies_in(leaf_b, nd.left);
      if (a_left != b_left) return id;
      id = a_left ? nd.left : nd.right;
    }
    return id;
  }

  bool lies_in(int leaf, int node) const {
    return tree.nodes[leaf].lo >= tree.nodes[node].lo && tree.nodes[leaf].hi <= tree.nodes[node].hi;
  }

  double pair_cov(const PointRef& a, const PointRef& b) const {
    const int la = leaf_for(a), lb = leaf_for(b);
    if (la == lb) {
      double v = kernel_base(spec, a.coords, b.coords, static_cast<int>(points.cols()));
      if (a.index >= 0 && a.index == b.index) v += spec.jitter;
      return v;
    }
    const int q = lca(la, lb);
    return psi(q, a).dot(gram_lu[q].solve(psi(q, b)));
  }
};

PointRef train_ref(const RowMatrix& points, int i) { return {points.row(i).data(), i}; }

}  // namespace

MatrixXd dense_hier(const PartitionTree& tree, const RowMatrix& points, const KernelSpec& spec,
                    int cap) {
  const int n = tree.n();
  require(n <= cap, "dense_hier: size exceeds the cap");
  Oracle o(tree, points, spec);
  MatrixXd M(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      const double v = o.pair_cov(train_ref(points, i), train_ref(points, j));
      M(i, j) = v;
      M(j, i) = v;
    }
  }
  return M;
}

double dense_path_cov(const PartitionTree& tree, const RowMatrix& points, const KernelSpec& spec,
                      int i, int j) {
  Oracle o(tree, points, spec);
  require(o.leaf_of[i] != o.leaf_of[j], "dense_path_cov: points share a leaf");
  return o.pair_cov(train_ref(points, i), train_ref(points, j));
}

double dense_path_cov(const PartitionTree& tree, const RowMatrix& points, const KernelSpec& spec,
                      const Eigen::Ref<const VectorXd>& x, const Eigen::Ref<const VectorXd>& y) {
  Oracle o(tree, points, spec);
  PointRef a{x.data(), -1}, b{y.data(), -1};
  require(o.leaf_for(a) != o.leaf_for(b), "dense_path_cov: points share a leaf");
  return o.pair_cov(a, b);
}

VectorXd dense_oos_column(const PartitionTree& tree, const RowMatrix& points,
                          const KernelSpec& spec, const double* x, int d) {
  require(d == points.cols(), "dense_oos_column: dimension mismatch");
  Oracle o(tree, points, spec);
  PointRef b{x, -1};
  VectorXd col(tree.n());
  for (int i = 0; i < tree.n(); ++i) col[i] = o.pair_cov(train_ref(points, i), b);
  return col;
}

std::vector<MatrixXd> xi_decomposition(const PartitionTree& tree, const RowMatrix& points,
                                       const KernelSpec& spec, int cap) {
  const int n = tree.n();
  require(n <= cap, "xi_decomposition: size exceeds the cap");
  Oracle o(tree, points, spec);
  std::vector<MatrixXd> parts;
  parts.reserve(tree.nodes.size());

  for (const TreeNode& nd : tree.nodes) {
    MatrixXd part = MatrixXd::Zero(n, n);
    const IndexVec members = tree.node_points(nd.id);

    if (tree.single_leaf()) {
      parts.push_back(kernel_gram(spec, points, members));
      return parts;
    }

    if (nd.is_leaf()) {
      // local Schur complement against the parent's landmarks
      const IndexVec& lm = tree.nodes[nd.parent].landmarks;
      MatrixXd cross = kernel_cross(spec, points, members, lm);
      MatrixXd block = kernel_gram(spec, points, members) -
                       cross * o.gram_lu[nd.parent].solve(cross.transpose());
      for (size_t a = 0; a < members.size(); ++a)
        for (size_t b = 0; b < members.size(); ++b) part(members[a], members[b]) = block(a, b);
    } else {
      MatrixXd middle = kernel_gram(spec, points, nd.landmarks);
      if (nd.parent >= 0) {
        MatrixXd cross =
            kernel_cross(spec, points, nd.landmarks, tree.nodes[nd.parent].landmarks);
        middle -= cross * o.gram_lu[nd.parent].solve(cross.transpose());
      }
      // rows of psi through the node's own Gram inverse, then the middle factor
      MatrixXd T(nd.landmarks.size(), members.size());
      for (size_t a = 0; a < members.size(); ++a)
        T.col(a) = o.gram_lu[nd.id].solve(o.psi(nd.id, train_ref(points, members[a])));
      MatrixXd block = T.transpose() * middle * T;
      for (size_t a = 0; a < members.size(); ++a)
        for (size_t b = 0; b < members.size(); ++b) part(members[a], members[b]) = block(a, b);
    }
    parts.push_back(std::move(part));
  }
  return parts;
}

}  // namespace hck::reference
