#include "hck/hmatrix.hpp"

#include <string>

namespace hck {

namespace {

std::string node_str(int id) { return "node " + std::to_string(id); }

VectorXd gather(const Eigen::Ref<const VectorXd>& v, const IndexVec& perm, int lo, int hi) {
  VectorXd out(hi - lo);
  for (int t = lo; t < hi; ++t) out[t - lo] = v[perm[t]];
  return out;
}

void scatter_add(VectorXd& v, const VectorXd& part, const IndexVec& perm, int lo) {
  for (int t = 0; t < part.size(); ++t) v[perm[lo + t]] += part[t];
}

}  // namespace

std::size_t HierFactors::stored_floats() const {
  std::size_t total = 0;
  for (const auto* group : {&A, &U, &Sigma, &W, &gram_chol})
    for (const auto& M : *group) total += static_cast<std::size_t>(M.size());
  return total;
}

MatrixXd gram_solve(const MatrixXd& chol_lower, const MatrixXd& B) {
  MatrixXd X = chol_lower.triangularView<Eigen::Lower>().solve(B);
  chol_lower.transpose().triangularView<Eigen::Upper>().solveInPlace(X);
  return X;
}

HierFactors assemble(const PartitionTree& tree, const RowMatrix& points, const KernelSpec& spec) {
  spec.validate();
  const int nn = static_cast<int>(tree.nodes.size());
  HierFactors H;
  H.A.resize(nn);
  H.U.resize(nn);
  H.Sigma.resize(nn);
  H.W.resize(nn);
  H.gram_chol.resize(nn);

  // landmark Grams first; every other factor solves against them
  for (int id = 0; id < nn; ++id) {
    const TreeNode& nd = tree.nodes[id];
    if (nd.is_leaf()) continue;
    H.Sigma[id] = kernel_gram(spec, points, nd.landmarks);
    Eigen::LLT<MatrixXd> llt(H.Sigma[id]);
    if (llt.info() != Eigen::Success)
      throw Error("assemble: landmark Gram not positive-definite at " + node_str(id) +
                  " (jitter too small?)");
    H.gram_chol[id] = llt.matrixL();
  }

#pragma omp parallel for schedule(dynamic)
  for (int id = 0; id < nn; ++id) {
    const TreeNode& nd = tree.nodes[id];
    if (nd.is_leaf()) {
      const IndexVec pts = tree.node_points(id);
      H.A[id] = kernel_gram(spec, points, pts);
      if (nd.parent >= 0) {
        const TreeNode& par = tree.nodes[nd.parent];
        MatrixXd cross = kernel_cross(spec, points, par.landmarks, pts);
        H.U[id] = gram_solve(H.gram_chol[nd.parent], cross).transpose();
      }
    } else if (nd.parent >= 0) {
      const TreeNode& par = tree.nodes[nd.parent];
      MatrixXd cross = kernel_cross(spec, points, par.landmarks, nd.landmarks);
      H.W[id] = gram_solve(H.gram_chol[nd.parent], cross).transpose();
    }
  }
  return H;
}

VectorXd matvec(const HierFactors& H, const PartitionTree& tree,
                const Eigen::Ref<const VectorXd>& b) {
  const int n = tree.n();
  require(static_cast<int>(b.size()) == n, "matvec: length mismatch");
  VectorXd y = VectorXd::Zero(n);

  if (tree.single_leaf()) {
    VectorXd bi = gather(b, tree.perm, 0, n);
    scatter_add(y, H.A[0] * bi, tree.perm, 0);
    return y;
  }

  const int nn = static_cast<int>(tree.nodes.size());
  std::vector<VectorXd> c(nn), d(nn);
  for (int id = 1; id < nn; ++id)
    d[id] = VectorXd::Zero(tree.nodes[tree.nodes[id].parent].landmarks.size());

  // post-order: c up the tree, siblings exchange through Sigma of the parent
  auto upward = [&](auto&& self, int id) -> void {
    const TreeNode& nd = tree.nodes[id];
    if (nd.is_leaf()) {
      VectorXd bi = gather(b, tree.perm, nd.lo, nd.hi);
      c[id] = H.U[id].transpose() * bi;
      scatter_add(y, H.A[id] * bi, tree.perm, nd.lo);
    } else {
      self(self, nd.left);
      self(self, nd.right);
      if (nd.parent >= 0) c[id] = H.W[id].transpose() * (c[nd.left] + c[nd.right]);
    }
    if (nd.parent >= 0) {
      const TreeNode& par = tree.nodes[nd.parent];
      const int sib = (par.left == id) ? par.right : par.left;
      d[sib] += H.Sigma[nd.parent] * c[id];
    }
  };

  // pre-order: d cascades down, leaves emit through their bases
  auto downward = [&](auto&& self, int id) -> void {
    const TreeNode& nd = tree.nodes[id];
    if (nd.is_leaf()) {
      scatter_add(y, H.U[id] * d[id], tree.perm, nd.lo);
      return;
    }
    for (int ch : {nd.left, nd.right}) {
      if (nd.parent >= 0) d[ch] += H.W[id] * d[id];
      self(self, ch);
    }
  };

  upward(upward, 0);
  downward(downward, 0);
  return y;
}

HierFactors invert(const HierFactors& H, const PartitionTree& tree, double lambda_shift) {
  require(lambda_shift >= 0.0, "invert: negative shift");
  const int nn = static_cast<int>(tree.nodes.size());
  HierFactors out;
  out.A.resize(nn);
  out.U.resize(nn);
  out.Sigma.resize(nn);
  out.W.resize(nn);
  out.gram_chol.resize(nn);

  if (tree.single_leaf()) {
    MatrixXd M = H.A[0];
    M.diagonal().array() += lambda_shift;
    Eigen::LLT<MatrixXd> llt(M);
    if (llt.info() != Eigen::Success)
      throw Error("invert: dense block not positive-definite at the root");
    out.A[0] = llt.solve(MatrixXd::Identity(M.rows(), M.cols()));
    return out;
  }

  std::vector<MatrixXd> theta(nn), xi(nn), corr(nn);

  auto upward = [&](auto&& self, int id) -> void {
    const TreeNode& nd = tree.nodes[id];
    if (nd.is_leaf()) {
      MatrixXd M = H.A[id];
      M.diagonal().array() += lambda_shift;
      M.noalias() -= H.U[id] * (H.Sigma[nd.parent] * H.U[id].transpose());
      Eigen::LLT<MatrixXd> llt(M);
      if (llt.info() != Eigen::Success)
        throw Error("invert: upward pass failed at leaf " + node_str(id) +
                    " (block not positive-definite; shift too small?)");
      out.A[id] = llt.solve(MatrixXd::Identity(M.rows(), M.cols()));
      out.U[id] = out.A[id] * H.U[id];
      theta[id] = H.U[id].transpose() * out.U[id];
      return;
    }
    for (int ch : {nd.left, nd.right}) {
      self(self, ch);
      if (!tree.nodes[ch].is_leaf()) {
        const Eigen::Index r = out.Sigma[ch].rows();
        out.W[ch] = (MatrixXd::Identity(r, r) + out.Sigma[ch] * xi[ch]) * H.W[ch];
        theta[ch] = H.W[ch].transpose() * xi[ch] * out.W[ch];
      }
    }
    xi[id] = theta[nd.left] + theta[nd.right];
    MatrixXd lambda = H.Sigma[id];
    if (nd.parent >= 0)
      lambda.noalias() -= H.W[id] * (H.Sigma[nd.parent] * H.W[id].transpose());
    const Eigen::Index r = lambda.rows();
    MatrixXd system = MatrixXd::Identity(r, r) + lambda * xi[id];
    out.Sigma[id] = -Eigen::PartialPivLU<MatrixXd>(system).solve(lambda);
    if (!out.Sigma[id].allFinite())
      throw Error("invert: upward pass produced a singular system at " + node_str(id));
    for (int ch : {nd.left, nd.right})
      if (!tree.nodes[ch].is_leaf()) corr[ch] = out.W[ch] * out.Sigma[id] * out.W[ch].transpose();
    if (nd.parent < 0) corr[id] = MatrixXd::Zero(r, r);
  };

  // corrections to Sigma cascade once from the root; leaves fold theirs into A
  auto downward = [&](auto&& self, int id) -> void {
    const TreeNode& nd = tree.nodes[id];
    if (nd.is_leaf()) {
      out.A[id].noalias() += out.U[id] * (out.Sigma[nd.parent] * out.U[id].transpose());
      return;
    }
    if (nd.parent >= 0) corr[id].noalias() += out.W[id] * (corr[nd.parent] * out.W[id].transpose());
    out.Sigma[id] += corr[id];
    self(self, nd.left);
    self(self, nd.right);
  };

  upward(upward, 0);
  downward(downward, 0);
  return out;
}

MatrixXd materialize(const HierFactors& H, const PartitionTree& tree, int cap) {
  const int n = tree.n();
  require(n <= cap, "materialize: size exceeds the cap");
  MatrixXd M = MatrixXd::Zero(n, n);

  // bases for nonleaf nodes are reconstructed bottom-up as stacked children
  // times the transfer factor
  std::vector<MatrixXd> basis(tree.nodes.size());
  auto build_basis = [&](auto&& self, int id) -> void {
    const TreeNode& nd = tree.nodes[id];
    if (nd.is_leaf()) {
      basis[id] = H.U[id];
      return;
    }
    self(self, nd.left);
    self(self, nd.right);
    if (nd.parent < 0) return;
    const TreeNode& l = tree.nodes[nd.left];
    const TreeNode& r = tree.nodes[nd.right];
    MatrixXd stacked(nd.size(), H.W[id].rows());
    stacked.topRows(l.size()) = basis[nd.left];
    stacked.bottomRows(r.size()) = basis[nd.right];
    basis[id] = stacked * H.W[id];
  };
  if (!tree.single_leaf()) build_basis(build_basis, 0);

  for (const TreeNode& nd : tree.nodes) {
    if (nd.is_leaf()) {
      for (int a = 0; a < nd.size(); ++a)
        for (int b = 0; b < nd.size(); ++b)
          M(tree.perm[nd.lo + a], tree.perm[nd.lo + b]) = H.A[nd.id](a, b);
    } else {
      const TreeNode& l = tree.nodes[nd.left];
      const TreeNode& r = tree.nodes[nd.right];
      MatrixXd B = basis[nd.left] * (H.Sigma[nd.id] * basis[nd.right].transpose());
      for (int a = 0; a < l.size(); ++a)
        for (int b = 0; b < r.size(); ++b) {
          M(tree.perm[l.lo + a], tree.perm[r.lo + b]) = B(a, b);
          M(tree.perm[r.lo + b], tree.perm[l.lo + a]) = B(a, b);
        }
    }
  }
  return M;
}

OosState oos_prepare(const HierFactors& H, const PartitionTree& tree,
                     const Eigen::Ref<const VectorXd>& w) {
  require(static_cast<int>(w.size()) == tree.n(), "oos_prepare: length mismatch");
  OosState st;
  st.w = w;
  if (tree.single_leaf()) return st;

  const int nn = static_cast<int>(tree.nodes.size());
  st.e.resize(nn);
  st.c.resize(nn);

  auto upward = [&](auto&& self, int id) -> void {
    const TreeNode& nd = tree.nodes[id];
    if (nd.is_leaf()) {
      st.e[id] = H.U[id].transpose() * gather(w, tree.perm, nd.lo, nd.hi);
    } else {
      self(self, nd.left);
      self(self, nd.right);
      if (nd.parent >= 0) st.e[id] = H.W[id].transpose() * (st.e[nd.left] + st.e[nd.right]);
    }
  };
  upward(upward, 0);

  for (const TreeNode& nd : tree.nodes) {
    if (nd.is_leaf()) continue;
    st.c[nd.left] = H.Sigma[nd.id] * st.e[nd.right];
    st.c[nd.right] = H.Sigma[nd.id] * st.e[nd.left];
  }
  return st;
}

double oos_eval(const OosState& state, const HierFactors& H, const PartitionTree& tree,
                const RowMatrix& points, const KernelSpec& spec, const double* x, int d) {
  if (tree.single_leaf()) {
    const IndexVec pts = tree.node_points(0);
    return gather(state.w, tree.perm, 0, tree.n()).dot(kernel_column(spec, points, pts, x, d));
  }

  const IndexVec path = locate_leaf(tree, x, d);
  const int leaf = path.back();
  const int parent = tree.nodes[leaf].parent;

  const IndexVec leaf_pts = tree.node_points(leaf);
  double z = gather(state.w, tree.perm, tree.nodes[leaf].lo, tree.nodes[leaf].hi)
                 .dot(kernel_column(spec, points, leaf_pts, x, d));

  VectorXd dvec = gram_solve(H.gram_chol[parent],
                             kernel_column(spec, points, tree.nodes[parent].landmarks, x, d));
  z += state.c[leaf].dot(dvec);
  for (int t = static_cast<int>(path.size()) - 2; t >= 1; --t) {
    dvec = H.W[path[t]].transpose() * dvec;
    z += state.c[path[t]].dot(dvec);
  }
  return z;
}

}  // namespace hck
