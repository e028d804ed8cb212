#include "hck/baselines.hpp"

#include "hck/hmatrix.hpp"
#include "hck/rng.hpp"

#include <cmath>
#include <numbers>

namespace hck {

namespace {

MatrixXd landmark_chol(const KernelSpec& spec, const RowMatrix& points, const IndexVec& lm) {
  MatrixXd G = kernel_gram(spec, points, lm);
  Eigen::LLT<MatrixXd> llt(G);
  if (llt.info() != Eigen::Success)
    throw Error("nystrom: landmark Gram not positive-definite (jitter too small?)");
  return llt.matrixL();
}

}  // namespace

MatrixXd nystrom_gram(const KernelSpec& spec, const RowMatrix& points, const IndexVec& landmarks) {
  NystromFactor f = nystrom_factor(spec, points, landmarks);
  return f.phi * f.phi.transpose();
}

NystromFactor nystrom_factor(const KernelSpec& spec, const RowMatrix& points,
                             const IndexVec& landmarks) {
  spec.validate();
  require(!landmarks.empty(), "nystrom: empty landmark set");
  NystromFactor f;
  f.chol = landmark_chol(spec, points, landmarks);

  IndexVec all(points.rows());
  for (int i = 0; i < static_cast<int>(all.size()); ++i) all[i] = i;
  MatrixXd cross = kernel_cross(spec, points, landmarks, all);  // r x n
  f.phi = f.chol.triangularView<Eigen::Lower>().solve(cross).transpose();

  f.landmark_points.resize(landmarks.size(), points.cols());
  for (size_t t = 0; t < landmarks.size(); ++t) f.landmark_points.row(t) = points.row(landmarks[t]);
  return f;
}

RffMap rff_make(const KernelSpec& spec, int r, int d, std::uint64_t seed) {
  spec.validate();
  require(r >= 1 && d >= 1, "rff: bad shape");
  if (spec.family == KernelFamily::InvMultiquadric)
    throw Error("rff: inverse multiquadric has no sampled spectral density here");

  RffMap map;
  map.omegas.resize(r, d);
  map.phases.resize(r);
  map.scale = std::sqrt(2.0 / r);
  SplitMix64 rng(seed);
  for (int i = 0; i < r; ++i) {
    for (int k = 0; k < d; ++k) {
      if (spec.family == KernelFamily::Gaussian) {
        map.omegas(i, k) = rng.normal() / spec.sigma;
      } else {
        // Laplace is a tensor product of exponentials; each frequency
        // component is Cauchy with scale 1/sigma.
        map.omegas(i, k) =
            std::tan(std::numbers::pi * (rng.uniform01() - 0.5)) / spec.sigma;
      }
    }
    map.phases[i] = 2.0 * std::numbers::pi * rng.uniform01();
  }
  return map;
}

MatrixXd rff_features(const RffMap& map, const RowMatrix& X) {
  require(X.cols() == map.omegas.cols(), "rff: dimension mismatch");
  MatrixXd F = X * map.omegas.transpose();
  F.rowwise() += map.phases.transpose();
  return map.scale * F.array().cos().matrix();
}

VectorXd rff_features_point(const RffMap& map, const double* x, int d) {
  require(d == map.omegas.cols(), "rff: dimension mismatch");
  Eigen::Map<const VectorXd> xv(x, d);
  VectorXd f = map.omegas * xv + map.phases;
  return map.scale * f.array().cos().matrix();
}

IndependentBlocks independent_gram(const KernelSpec& spec, const RowMatrix& points,
                                   const PartitionTree& tree) {
  spec.validate();
  IndependentBlocks out;
  out.leaf_ids = tree.leaf_ids();
  out.blocks.reserve(out.leaf_ids.size());
  for (int id : out.leaf_ids) out.blocks.push_back(kernel_gram(spec, points, tree.node_points(id)));
  return out;
}

MatrixXd independent_dense(const IndependentBlocks& blocks, const PartitionTree& tree) {
  const int n = tree.n();
  MatrixXd M = MatrixXd::Zero(n, n);
  for (size_t t = 0; t < blocks.leaf_ids.size(); ++t) {
    const TreeNode& nd = tree.nodes[blocks.leaf_ids[t]];
    for (int a = 0; a < nd.size(); ++a)
      for (int b = 0; b < nd.size(); ++b)
        M(tree.perm[nd.lo + a], tree.perm[nd.lo + b]) = blocks.blocks[t](a, b);
  }
  return M;
}

}  // namespace hck
