#pragma once

#include "hck/kernels.hpp"
#include "hck/partition.hpp"

namespace hck {

/// Recursively low-rank compressed kernel matrix. All vectors are indexed by
/// node id; entries are empty where the factor does not apply.
///   A[i]      leaf diagonal block K'(X_i, X_i)
///   U[i]      leaf basis K'(X_i, L_p) K'(L_p, L_p)^-1, p = parent of i
///   Sigma[p]  nonleaf middle factor K'(L_p, L_p)
///   W[p]      nonleaf nonroot transfer K'(L_p, L_g) K'(L_g, L_g)^-1, g = parent of p
///   gram_chol[p] lower Cholesky factor of Sigma[p], kept for the
///                out-of-sample path
/// where L_p denotes the landmark set of node p. Nonleaf bases are never
/// stored; they are the stacked child bases times W.
struct HierFactors {
  std::vector<MatrixXd> A;
  std::vector<MatrixXd> U;
  std::vector<MatrixXd> Sigma;
  std::vector<MatrixXd> W;
  std::vector<MatrixXd> gram_chol;

  std::size_t stored_floats() const;
};

/// Traversal state for repeated out-of-sample inner products w'k(X, x):
/// everything here is independent of x.
struct OosState {
  std::vector<VectorXd> e;  // per nonroot node, in the parent's landmark space
  std::vector<VectorXd> c;  // per nonroot node: Sigma_parent * e_sibling
  VectorXd w;               // weights in original training order
};

HierFactors assemble(const PartitionTree& tree, const RowMatrix& points, const KernelSpec& spec);

/// y = A b in two tree passes without materializing. b and y are in original
/// training order.
VectorXd matvec(const HierFactors& H, const PartitionTree& tree,
                const Eigen::Ref<const VectorXd>& b);

/// Factors of (A + lambda_shift I)^-1 with the same structural skeleton.
HierFactors invert(const HierFactors& H, const PartitionTree& tree, double lambda_shift);

/// Dense expansion in original training order; test oracle hook.
MatrixXd materialize(const HierFactors& H, const PartitionTree& tree, int cap = 4096);

OosState oos_prepare(const HierFactors& H, const PartitionTree& tree,
                     const Eigen::Ref<const VectorXd>& w);

/// w' k_hier(X, x) for an out-of-sample x, touching only x's root-to-leaf path.
double oos_eval(const OosState& state, const HierFactors& H, const PartitionTree& tree,
                const RowMatrix& points, const KernelSpec& spec, const double* x, int d);

/// Triangular solve pair (L L')^-1 B against a stored Cholesky factor.
MatrixXd gram_solve(const MatrixXd& chol_lower, const MatrixXd& B);

}  // namespace hck
