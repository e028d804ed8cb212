#pragma once

#include "hck/baselines.hpp"
#include "hck/dataset.hpp"
#include "hck/hmatrix.hpp"

#include <cstdint>

namespace hck {

enum class Method { Hierarchical, Nystrom, Fourier, Independent };
enum class Task { Regression, Binary, Multiclass };

std::string method_name(Method m);
Method method_from_name(const std::string& name);
std::string task_name(Task t);
Task task_from_name(const std::string& name);

struct FitOptions {
  Method method = Method::Hierarchical;
  KernelSpec spec;
  double lambda = 0.01;
  Task task = Task::Regression;
  int levels = -1;  // coupled sizing when >= 0, otherwise explicit n0/r below
  int n0 = -1;
  int r = -1;
  std::uint64_t seed = 0;
};

struct FitStats {
  double build_seconds = 0.0;   // partitioning plus kernel matrix construction
  double solve_seconds = 0.0;   // inversion / normal equations
  std::size_t floats_stored = 0;
};

/// A fitted predictor. Only the state the prediction path reads is kept (and
/// serialized); in particular the hierarchical method keeps the transfer
/// factors, the prefactored landmark Grams, and the per-output traversal
/// vectors, not the assembled matrix.
struct Model {
  Method method = Method::Hierarchical;
  KernelSpec spec;
  double lambda = 0.0;
  Task task = Task::Regression;
  std::uint64_t seed = 0;
  int levels = -1;
  int n0 = 0;
  int r = 0;
  std::vector<double> class_labels;  // empty for regression
  NormStats norm;                    // applied to raw inputs before predict

  RowMatrix train_points;        // hierarchical, independent
  PartitionTree tree;            // hierarchical, independent
  HierFactors oos_factors;       // hierarchical: W and gram_chol only
  std::vector<OosState> states;  // hierarchical: one per output
  MatrixXd weights;              // hierarchical, independent: n x outputs
  NystromFactor nystrom;         // nystrom: chol + landmark coordinates
  RffMap rff;                    // fourier
  MatrixXd coef;                 // nystrom, fourier: r x outputs
  FitStats fit_stats;

  int outputs() const {
    return task == Task::Multiclass ? std::max<int>(1, class_labels.size()) : 1;
  }
};

Model fit(const RowMatrix& points, const VectorXd& targets, const FitOptions& opts);
inline Model fit(const Dataset& train, const FitOptions& opts) {
  return fit(train.points, train.targets, opts);
}

/// Raw per-output scores; one column per output, one row per query point.
MatrixXd predict_scores(const Model& model, const RowMatrix& X);

/// Regression values, or class labels decided by sign / argmax (ties go to
/// the lowest class).
VectorXd predict(const Model& model, const RowMatrix& X);

/// Relative l2 error for regression, fraction correct for classification.
double evaluate(const VectorXd& pred, const VectorXd& truth, Task task);

/// Dense GP posterior with the exact base kernel; capped helper.
struct GpPosterior {
  VectorXd mean;
  MatrixXd covariance;
};
GpPosterior gp_posterior_dense(const RowMatrix& X, const VectorXd& y, const RowMatrix& Xstar,
                               const KernelSpec& spec, double lambda, int cap = 4096);

}  // namespace hck
