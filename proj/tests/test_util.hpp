#pragma once

#include "hck/common.hpp"
#include "hck/rng.hpp"

// shared helpers for the unit suites

inline hck::RowMatrix random_points(int n, int d, std::uint64_t seed) {
  hck::SplitMix64 rng(seed);
  hck::RowMatrix X(n, d);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < d; ++k) X(i, k) = 2.0 * rng.uniform01() - 1.0;
  return X;
}

inline hck::VectorXd random_vector(int n, std::uint64_t seed) {
  hck::SplitMix64 rng(seed);
  hck::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = rng.normal();
  return v;
}

inline hck::IndexVec all_indices(int n) {
  hck::IndexVec idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  return idx;
}

inline double min_eigenvalue(const hck::MatrixXd& M) {
  Eigen::SelfAdjointEigenSolver<hck::MatrixXd> eig((M + M.transpose()) / 2.0);
  return eig.eigenvalues().minCoeff();
}

inline double rel_frob(const hck::MatrixXd& A, const hck::MatrixXd& B) {
  return (A - B).norm() / B.norm();
}
