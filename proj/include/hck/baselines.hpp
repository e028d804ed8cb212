#pragma once

#include "hck/kernels.hpp"
#include "hck/partition.hpp"

#include <cstdint>

namespace hck {

/// Low-rank kernel conditioned on a landmark subset of the training points.
MatrixXd nystrom_gram(const KernelSpec& spec, const RowMatrix& points,
                      const IndexVec& landmarks);

/// Factor form: Phi with Phi Phi' equal to nystrom_gram. Also returns the
/// lower Cholesky factor of the landmark Gram, which maps new points to
/// features.
struct NystromFactor {
  MatrixXd phi;        // n x r
  MatrixXd chol;       // r x r lower factor of K'(L, L)
  RowMatrix landmark_points;
};
NystromFactor nystrom_factor(const KernelSpec& spec, const RowMatrix& points,
                             const IndexVec& landmarks);

/// Random cosine features; omega rows follow the normalized spectral density
/// of the base family.
struct RffMap {
  MatrixXd omegas;  // r x d
  VectorXd phases;  // r, in [0, 2pi)
  double scale = 0.0;  // sqrt(2/r)
};
RffMap rff_make(const KernelSpec& spec, int r, int d, std::uint64_t seed);
MatrixXd rff_features(const RffMap& map, const RowMatrix& X);
VectorXd rff_features_point(const RffMap& map, const double* x, int d);

/// Block-diagonal kernel over the leaves of a partitioning tree; covariance
/// across leaves is exactly zero.
struct IndependentBlocks {
  IndexVec leaf_ids;
  std::vector<MatrixXd> blocks;  // K'(X_i, X_i) per leaf, in leaf_ids order
};
IndependentBlocks independent_gram(const KernelSpec& spec, const RowMatrix& points,
                                   const PartitionTree& tree);
/// Dense n-by-n expansion in original training order (test hook).
MatrixXd independent_dense(const IndependentBlocks& blocks, const PartitionTree& tree);

}  // namespace hck
