#pragma once

#include "hck/common.hpp"

#include <optional>
#include <string>

namespace hck {

enum class KernelFamily { Gaussian, Laplace, InvMultiquadric };

std::string family_name(KernelFamily f);
KernelFamily family_from_name(const std::string& name);

/// Base kernel k plus the diagonal stabilizer: k'(x,x') = k(x,x') + jitter
/// when x and x' are the same training point (identity, not coordinates).
struct KernelSpec {
  KernelFamily family = KernelFamily::Gaussian;
  double sigma = 1.0;
  double jitter = 0.0;

  void validate() const {
    require(sigma > 0.0, "KernelSpec: sigma must be positive");
    require(jitter >= 0.0, "KernelSpec: jitter must be nonnegative");
  }
};

/// k(x,x') on raw coordinate arrays of length d.
double kernel_base(const KernelSpec& spec, const double* x, const double* y, int d);

/// k'(x,x'): adds jitter iff same_identity.
double kernel_eval(const KernelSpec& spec, const Eigen::Ref<const VectorXd>& x,
                   const Eigen::Ref<const VectorXd>& y, bool same_identity = false);

/// Jittered Gram K'(X_I, X_I); upper triangle computed and mirrored so the
/// result is symmetric to the bit.
MatrixXd kernel_gram(const KernelSpec& spec, const RowMatrix& points, const IndexVec& idx);

/// Cross matrix K'(X_I, X_J); jitter lands exactly where the two index sets
/// refer to the same training point.
MatrixXd kernel_cross(const KernelSpec& spec, const RowMatrix& points, const IndexVec& rows,
                      const IndexVec& cols);

/// Cross matrix between two unrelated point sets (no shared identities).
MatrixXd kernel_cross(const KernelSpec& spec, const RowMatrix& Y, const RowMatrix& Z);

/// Column k(X_I, x) for an out-of-sample x (never jittered).
VectorXd kernel_column(const KernelSpec& spec, const RowMatrix& points, const IndexVec& idx,
                       const double* x, int d);

}  // namespace hck
