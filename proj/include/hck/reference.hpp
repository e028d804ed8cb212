#pragma once

#include "hck/kernels.hpp"
#include "hck/partition.hpp"

namespace hck::reference {

/// Dense n-by-n hierarchical kernel matrix evaluated by direct recursion on
/// the kernel definition. Deliberately shares no factorization machinery with
/// the compressed representation; this is the slow, obviously-correct oracle.
MatrixXd dense_hier(const PartitionTree& tree, const RowMatrix& points, const KernelSpec& spec,
                    int cap = 4096);

/// Covariance between two training points in distinct leaves, evaluated as
/// the expanded chain of Nystrom hops along the two root paths.
double dense_path_cov(const PartitionTree& tree, const RowMatrix& points, const KernelSpec& spec,
                      int i, int j);

/// Same chain for raw points carrying no training identity.
double dense_path_cov(const PartitionTree& tree, const RowMatrix& points, const KernelSpec& spec,
                      const Eigen::Ref<const VectorXd>& x, const Eigen::Ref<const VectorXd>& y);

/// k_hier(X, x) for an out-of-sample x, each entry via the expanded chains.
VectorXd dense_oos_column(const PartitionTree& tree, const RowMatrix& points,
                          const KernelSpec& spec, const double* x, int d);

/// Per-node PSD pieces of the kernel, zero-padded to n-by-n; they sum to
/// dense_hier over the nodes containing each pair.
std::vector<MatrixXd> xi_decomposition(const PartitionTree& tree, const RowMatrix& points,
                                       const KernelSpec& spec, int cap = 4096);

}  // namespace hck::reference
