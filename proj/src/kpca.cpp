#include "hck/kpca.hpp"

#include <cmath>
#include <iostream>

namespace hck {

MatrixXd kpca_embed(const MatrixXd& gram, int q, int cap) {
  const Eigen::Index n = gram.rows();
  require(gram.cols() == n, "kpca_embed: Gram must be square");
  require(n <= cap, "kpca_embed: size exceeds the cap");
  require(q >= 1 && q <= n, "kpca_embed: embedding dimension out of range");

  // double centering: (I - 11'/n) K (I - 11'/n)
  VectorXd row_mean = gram.rowwise().mean();
  const double total_mean = row_mean.mean();
  MatrixXd C = gram;
  C.colwise() -= row_mean;
  C.rowwise() -= row_mean.transpose();
  C.array() += total_mean;

  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(C);
  require(eig.info() == Eigen::Success, "kpca_embed: eigendecomposition failed");

  MatrixXd out(n, q);
  for (int j = 0; j < q; ++j) {
    const Eigen::Index src = n - 1 - j;  // solver sorts ascending
    const double lam = eig.eigenvalues()[src];
    require(lam >= -1e-8, "kpca_embed: Gram is not positive semi-definite");
    VectorXd v = eig.eigenvectors().col(src);
    Eigen::Index peak = 0;
    v.cwiseAbs().maxCoeff(&peak);
    if (v[peak] < 0.0) v = -v;
    out.col(j) = std::sqrt(std::max(lam, 0.0)) * v;
  }
  return out;
}

double alignment_diff(const MatrixXd& U, const MatrixXd& Ut) {
  require(U.rows() == Ut.rows() && U.cols() == Ut.cols(), "alignment_diff: shape mismatch");
  const double denom = U.norm();
  require(denom > 0.0, "alignment_diff: reference embedding is zero");

  Eigen::ColPivHouseholderQR<MatrixXd> qr(Ut);
  if (qr.rank() < Ut.cols()) {
    std::cerr << "alignment_diff: rank-deficient embedding, using minimum-norm alignment\n";
    MatrixXd M = Ut.completeOrthogonalDecomposition().solve(U);
    return (U - Ut * M).norm() / denom;
  }
  MatrixXd M = qr.solve(U);
  return (U - Ut * M).norm() / denom;
}

}  // namespace hck
