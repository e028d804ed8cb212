#include "hck/kernels.hpp"

#include <cmath>

namespace hck {

std::string family_name(KernelFamily f) {
  switch (f) {
    case KernelFamily::Gaussian: return "gaussian";
    case KernelFamily::Laplace: return "laplace";
    case KernelFamily::InvMultiquadric: return "invmq";
  }
  throw Error("unknown kernel family");
}

KernelFamily family_from_name(const std::string& name) {
  if (name == "gaussian") return KernelFamily::Gaussian;
  if (name == "laplace") return KernelFamily::Laplace;
  if (name == "invmq" || name == "inv_multiquadric") return KernelFamily::InvMultiquadric;
  throw Error("unknown kernel family: " + name);
}

// Distances accumulate coordinate-wise in double; the squared norm is not
// rewritten through dot products, which cancels catastrophically at small
// sigma.
double kernel_base(const KernelSpec& spec, const double* x, const double* y, int d) {
  switch (spec.family) {
    case KernelFamily::Gaussian: {
      double sq = 0.0;
      for (int k = 0; k < d; ++k) {
        const double t = x[k] - y[k];
        sq += t * t;
      }
      return std::exp(-sq / (2.0 * spec.sigma * spec.sigma));
    }
    case KernelFamily::Laplace: {
      double l1 = 0.0;
      for (int k = 0; k < d; ++k) l1 += std::abs(x[k] - y[k]);
      return std::exp(-l1 / spec.sigma);
    }
    case KernelFamily::InvMultiquadric: {
      // sigma^2 / sqrt(|x-y|^2 + sigma^2); self-value is sigma, not 1.
      double sq = 0.0;
      for (int k = 0; k < d; ++k) {
        const double t = x[k] - y[k];
        sq += t * t;
      }
      return spec.sigma * spec.sigma / std::sqrt(sq + spec.sigma * spec.sigma);
    }
  }
  throw Error("unknown kernel family");
}

double kernel_eval(const KernelSpec& spec, const Eigen::Ref<const VectorXd>& x,
                   const Eigen::Ref<const VectorXd>& y, bool same_identity) {
  require(x.size() == y.size(), "kernel_eval: dimension mismatch");
  double v = kernel_base(spec, x.data(), y.data(), static_cast<int>(x.size()));
  if (same_identity) v += spec.jitter;
  return v;
}

MatrixXd kernel_gram(const KernelSpec& spec, const RowMatrix& points, const IndexVec& idx) {
  const int n = static_cast<int>(idx.size());
  const int d = static_cast<int>(points.cols());
  MatrixXd G(n, n);
  for (int i = 0; i < n; ++i) {
    const double* xi = points.row(idx[i]).data();
    G(i, i) = kernel_base(spec, xi, xi, d) + spec.jitter;
    for (int j = i + 1; j < n; ++j) {
      const double v = kernel_base(spec, xi, points.row(idx[j]).data(), d);
      G(i, j) = v;
      G(j, i) = v;
    }
  }
  return G;
}

MatrixXd kernel_cross(const KernelSpec& spec, const RowMatrix& points, const IndexVec& rows,
                      const IndexVec& cols) {
  const int d = static_cast<int>(points.cols());
  MatrixXd M(rows.size(), cols.size());
  for (size_t i = 0; i < rows.size(); ++i) {
    const double* xi = points.row(rows[i]).data();
    for (size_t j = 0; j < cols.size(); ++j) {
      double v = kernel_base(spec, xi, points.row(cols[j]).data(), d);
      if (rows[i] == cols[j]) v += spec.jitter;
      M(i, j) = v;
    }
  }
  return M;
}

MatrixXd kernel_cross(const KernelSpec& spec, const RowMatrix& Y, const RowMatrix& Z) {
  require(Y.cols() == Z.cols(), "kernel_cross: dimension mismatch");
  const int d = static_cast<int>(Y.cols());
  MatrixXd M(Y.rows(), Z.rows());
  for (Eigen::Index i = 0; i < Y.rows(); ++i)
    for (Eigen::Index j = 0; j < Z.rows(); ++j)
      M(i, j) = kernel_base(spec, Y.row(i).data(), Z.row(j).data(), d);
  return M;
}

VectorXd kernel_column(const KernelSpec& spec, const RowMatrix& points, const IndexVec& idx,
                       const double* x, int d) {
  require(d == points.cols(), "kernel_column: dimension mismatch");
  VectorXd v(idx.size());
  for (size_t i = 0; i < idx.size(); ++i)
    v[i] = kernel_base(spec, points.row(idx[i]).data(), x, d);
  return v;
}

}  // namespace hck
