#pragma once

#include "hck/common.hpp"

namespace hck {

/// Kernel PCA embedding: double-center the Gram, take the top-q eigenpairs in
/// descending order, scale eigenvectors by sqrt(eigenvalue). The sign of each
/// column is fixed by making its largest-magnitude entry positive.
MatrixXd kpca_embed(const MatrixXd& gram, int q, int cap = 8192);

/// Residual of the best linear alignment: min_M |U - Ut M|_F / |U|_F.
/// Rank-deficient Ut falls back to the minimum-norm M.
double alignment_diff(const MatrixXd& U, const MatrixXd& Ut);

}  // namespace hck
