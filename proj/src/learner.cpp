#include "hck/learner.hpp"

#include "hck/rng.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>

namespace hck {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// one-vs-all +-1 targets; regression keeps the raw values
MatrixXd output_targets(const VectorXd& y, Task task, std::vector<double>& labels_out) {
  if (task == Task::Regression) {
    labels_out.clear();
    return y;
  }
  std::set<double> distinct(y.data(), y.data() + y.size());
  labels_out.assign(distinct.begin(), distinct.end());
  require(labels_out.size() >= 2, "fit: classification needs at least two classes");
  if (task == Task::Binary) {
    require(labels_out.size() == 2, "fit: binary task with more than two labels");
    MatrixXd T(y.size(), 1);
    for (int i = 0; i < y.size(); ++i) T(i, 0) = (y[i] == labels_out[1]) ? 1.0 : -1.0;
    return T;
  }
  MatrixXd T = MatrixXd::Constant(y.size(), labels_out.size(), -1.0);
  for (int i = 0; i < y.size(); ++i) {
    const auto it = std::lower_bound(labels_out.begin(), labels_out.end(), y[i]);
    T(i, static_cast<int>(it - labels_out.begin())) = 1.0;
  }
  return T;
}

void resolve_sizing(const FitOptions& opts, int n, int& n0, int& r) {
  if (opts.levels >= 0) {
    std::tie(n0, r) = levels_to_sizes(n, opts.levels);
  } else {
    require(opts.n0 > 0 && opts.r > 0, "fit: sizing needs either levels or n0 and rank");
    n0 = opts.n0;
    r = opts.r;
  }
}

VectorXd kernel_column_raw(const KernelSpec& spec, const RowMatrix& pts, const double* x, int d) {
  VectorXd v(pts.rows());
  for (Eigen::Index i = 0; i < pts.rows(); ++i)
    v[i] = kernel_base(spec, pts.row(i).data(), x, d);
  return v;
}

void fit_hierarchical(Model& m, const RowMatrix& points, const MatrixXd& T) {
  const auto t0 = Clock::now();
  m.tree = build_tree(points, m.n0, m.r, m.seed);
  HierFactors H = assemble(m.tree, points, m.spec);
  m.fit_stats.build_seconds = seconds_since(t0);
  m.fit_stats.floats_stored = H.stored_floats();

  const auto t1 = Clock::now();
  HierFactors Ht = invert(H, m.tree, m.lambda - m.spec.jitter);
  m.fit_stats.solve_seconds = seconds_since(t1);

  m.weights.resize(points.rows(), T.cols());
  m.states.reserve(T.cols());
  for (int c = 0; c < T.cols(); ++c) {
    m.weights.col(c) = matvec(Ht, m.tree, T.col(c));
    m.states.push_back(oos_prepare(H, m.tree, m.weights.col(c)));
  }

  m.oos_factors.W = std::move(H.W);
  m.oos_factors.gram_chol = std::move(H.gram_chol);
  m.train_points = points;
}

void fit_features(Model& m, const MatrixXd& phi, const MatrixXd& T) {
  const auto t1 = Clock::now();
  MatrixXd normal = phi.transpose() * phi;
  normal.diagonal().array() += m.lambda - m.spec.jitter;
  Eigen::LLT<MatrixXd> llt(normal);
  require(llt.info() == Eigen::Success, "fit: normal equations not positive-definite");
  m.coef = llt.solve(phi.transpose() * T);
  m.fit_stats.solve_seconds = seconds_since(t1);
}

void fit_nystrom(Model& m, const RowMatrix& points, const MatrixXd& T) {
  const int n = static_cast<int>(points.rows());
  require(m.r <= n, "fit: rank exceeds the training size");
  const auto t0 = Clock::now();
  IndexVec lm = SplitMix64(m.seed).sample_without_replacement(n, m.r);
  std::sort(lm.begin(), lm.end());
  NystromFactor factor = nystrom_factor(m.spec, points, lm);
  m.fit_stats.build_seconds = seconds_since(t0);
  m.fit_stats.floats_stored = static_cast<std::size_t>(factor.phi.size() + factor.chol.size());
  fit_features(m, factor.phi, T);
  factor.phi.resize(0, 0);
  m.nystrom = std::move(factor);
}

void fit_fourier(Model& m, const RowMatrix& points, const MatrixXd& T) {
  const auto t0 = Clock::now();
  m.rff = rff_make(m.spec, m.r, static_cast<int>(points.cols()), m.seed);
  MatrixXd phi = rff_features(m.rff, points);
  m.fit_stats.build_seconds = seconds_since(t0);
  m.fit_stats.floats_stored = static_cast<std::size_t>(phi.size() + m.rff.omegas.size());
  fit_features(m, phi, T);
}

void fit_independent(Model& m, const RowMatrix& points, const MatrixXd& T) {
  const auto t0 = Clock::now();
  m.tree = build_tree(points, m.n0, m.r, m.seed);
  IndependentBlocks blocks = independent_gram(m.spec, points, m.tree);
  m.fit_stats.build_seconds = seconds_since(t0);
  std::size_t floats = 0;
  for (const MatrixXd& B : blocks.blocks) floats += B.size();
  m.fit_stats.floats_stored = floats;

  const auto t1 = Clock::now();
  m.weights.resize(points.rows(), T.cols());
  for (size_t t = 0; t < blocks.leaf_ids.size(); ++t) {
    const TreeNode& nd = m.tree.nodes[blocks.leaf_ids[t]];
    MatrixXd G = blocks.blocks[t];
    G.diagonal().array() += m.lambda - m.spec.jitter;
    Eigen::LLT<MatrixXd> llt(G);
    require(llt.info() == Eigen::Success,
            "fit: leaf block not positive-definite at node " + std::to_string(nd.id));
    MatrixXd rhs(nd.size(), T.cols());
    for (int a = 0; a < nd.size(); ++a) rhs.row(a) = T.row(m.tree.perm[nd.lo + a]);
    MatrixXd sol = llt.solve(rhs);
    for (int a = 0; a < nd.size(); ++a) m.weights.row(m.tree.perm[nd.lo + a]) = sol.row(a);
  }
  m.fit_stats.solve_seconds = seconds_since(t1);
  m.train_points = points;
}

}  // namespace

std::string method_name(Method m) {
  switch (m) {
    case Method::Hierarchical: return "hier";
    case Method::Nystrom: return "nystrom";
    case Method::Fourier: return "rff";
    case Method::Independent: return "indep";
  }
  throw Error("unknown method");
}

Method method_from_name(const std::string& name) {
  if (name == "hier" || name == "hierarchical") return Method::Hierarchical;
  if (name == "nystrom") return Method::Nystrom;
  if (name == "rff" || name == "fourier") return Method::Fourier;
  if (name == "indep" || name == "independent") return Method::Independent;
  throw Error("unknown method: " + name);
}

std::string task_name(Task t) {
  switch (t) {
    case Task::Regression: return "reg";
    case Task::Binary: return "bin";
    case Task::Multiclass: return "multi";
  }
  throw Error("unknown task");
}

Task task_from_name(const std::string& name) {
  if (name == "reg" || name == "regression") return Task::Regression;
  if (name == "bin" || name == "binary") return Task::Binary;
  if (name == "multi" || name == "multiclass") return Task::Multiclass;
  throw Error("unknown task: " + name);
}

Model fit(const RowMatrix& points, const VectorXd& targets, const FitOptions& opts) {
  opts.spec.validate();
  require(points.rows() >= 1, "fit: empty training set");
  require(points.rows() == targets.size(), "fit: points/targets length mismatch");
  require(opts.lambda > opts.spec.jitter, "fit: lambda must exceed the kernel jitter");

  Model m;
  m.method = opts.method;
  m.spec = opts.spec;
  m.lambda = opts.lambda;
  m.task = opts.task;
  m.seed = opts.seed;
  m.levels = opts.levels;
  resolve_sizing(opts, static_cast<int>(points.rows()), m.n0, m.r);

  MatrixXd T = output_targets(targets, opts.task, m.class_labels);
  switch (opts.method) {
    case Method::Hierarchical: fit_hierarchical(m, points, T); break;
    case Method::Nystrom: fit_nystrom(m, points, T); break;
    case Method::Fourier: fit_fourier(m, points, T); break;
    case Method::Independent: fit_independent(m, points, T); break;
  }
  return m;
}

MatrixXd predict_scores(const Model& model, const RowMatrix& X) {
  const int m = static_cast<int>(X.rows());
  const int d = static_cast<int>(X.cols());
  const int outs = model.outputs();
  MatrixXd scores(m, outs);

  switch (model.method) {
    case Method::Hierarchical: {
      require(d == model.tree.dim, "predict: dimension mismatch");
#pragma omp parallel for schedule(static)
      for (int i = 0; i < m; ++i)
        for (int c = 0; c < outs; ++c)
          scores(i, c) = oos_eval(model.states[c], model.oos_factors, model.tree,
                                  model.train_points, model.spec, X.row(i).data(), d);
      break;
    }
    case Method::Nystrom: {
      require(d == model.nystrom.landmark_points.cols(), "predict: dimension mismatch");
#pragma omp parallel for schedule(static)
      for (int i = 0; i < m; ++i) {
        VectorXd col = kernel_column_raw(model.spec, model.nystrom.landmark_points,
                                         X.row(i).data(), d);
        VectorXd phi = model.nystrom.chol.triangularView<Eigen::Lower>().solve(col);
        scores.row(i) = (model.coef.transpose() * phi).transpose();
      }
      break;
    }
    case Method::Fourier: {
      MatrixXd phi = rff_features(model.rff, X);
      scores = phi * model.coef;
      break;
    }
    case Method::Independent: {
      require(d == model.tree.dim, "predict: dimension mismatch");
#pragma omp parallel for schedule(static)
      for (int i = 0; i < m; ++i) {
        const int leaf = locate_leaf(model.tree, X.row(i).data(), d).back();
        const TreeNode& nd = model.tree.nodes[leaf];
        scores.row(i).setZero();
        for (int t = nd.lo; t < nd.hi; ++t) {
          const int g = model.tree.perm[t];
          const double kv =
              kernel_base(model.spec, model.train_points.row(g).data(), X.row(i).data(), d);
          scores.row(i) += kv * model.weights.row(g);
        }
      }
      break;
    }
  }
  return scores;
}

VectorXd predict(const Model& model, const RowMatrix& X) {
  MatrixXd scores = predict_scores(model, X);
  if (model.task == Task::Regression) return scores.col(0);

  VectorXd labels(scores.rows());
  if (model.task == Task::Binary) {
    for (int i = 0; i < scores.rows(); ++i)
      labels[i] = scores(i, 0) > 0.0 ? model.class_labels[1] : model.class_labels[0];
    return labels;
  }
  for (int i = 0; i < scores.rows(); ++i) {
    int best = 0;
    for (int c = 1; c < scores.cols(); ++c)
      if (scores(i, c) > scores(i, best)) best = c;  // ties keep the lowest class
    labels[i] = model.class_labels[best];
  }
  return labels;
}

double evaluate(const VectorXd& pred, const VectorXd& truth, Task task) {
  require(pred.size() == truth.size(), "evaluate: length mismatch");
  require(pred.size() > 0, "evaluate: empty input");
  if (task == Task::Regression) {
    const double denom = truth.norm();
    require(denom > 0.0, "evaluate: zero-norm truth has no relative error");
    return (pred - truth).norm() / denom;
  }
  int correct = 0;
  for (int i = 0; i < pred.size(); ++i) correct += (pred[i] == truth[i]);
  return static_cast<double>(correct) / static_cast<double>(pred.size());
}

GpPosterior gp_posterior_dense(const RowMatrix& X, const VectorXd& y, const RowMatrix& Xstar,
                               const KernelSpec& spec, double lambda, int cap) {
  spec.validate();
  require(X.rows() <= cap && Xstar.rows() <= cap, "gp_posterior_dense: size exceeds the cap");
  require(X.cols() == Xstar.cols(), "gp_posterior_dense: dimension mismatch");
  require(X.rows() == y.size(), "gp_posterior_dense: points/targets length mismatch");
  require(lambda >= spec.jitter, "gp_posterior_dense: lambda below the kernel jitter");

  IndexVec all(X.rows());
  for (int i = 0; i < static_cast<int>(all.size()); ++i) all[i] = i;
  MatrixXd K = kernel_gram(spec, X, all);
  K.diagonal().array() += lambda - spec.jitter;
  Eigen::LLT<MatrixXd> llt(K);
  require(llt.info() == Eigen::Success, "gp_posterior_dense: train Gram not positive-definite");

  MatrixXd cross = kernel_cross(spec, X, Xstar);  // n x m
  GpPosterior post;
  post.mean = cross.transpose() * llt.solve(y);
  post.covariance = kernel_cross(spec, Xstar, Xstar) - cross.transpose() * llt.solve(cross);
  return post;
}

}  // namespace hck
