#include "hck/learner.hpp"

#include "hck/reference.hpp"

#include "doctest.h"
#include "test_util.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace hck;

namespace {

VectorXd smooth_targets(const RowMatrix& X) {
  VectorXd y(X.rows());
  for (int i = 0; i < X.rows(); ++i) y[i] = std::sin(2.0 * X.row(i).sum()) + 0.3 * X(i, 0);
  return y;
}

}  // namespace

TEST_CASE("fit validation") {
  RowMatrix X = random_points(10, 2, 900);
  VectorXd y = smooth_targets(X);
  FitOptions opts;
  opts.spec = {KernelFamily::Gaussian, 1.0, 0.1};
  opts.lambda = 0.05;  // below jitter
  opts.levels = 0;
  CHECK_THROWS_AS(fit(X, y, opts), Error);

  opts.lambda = 0.5;
  opts.task = Task::Binary;
  VectorXd ones = VectorXd::Ones(10);
  CHECK_THROWS_AS(fit(X, ones, opts), Error);  // a single class
}

TEST_CASE("one-point ridge regression is the analytic shrinkage") {
  RowMatrix X(1, 1);
  X << 0.3;
  VectorXd y(1);
  y << 2.0;
  FitOptions opts;
  opts.spec = {KernelFamily::Gaussian, 1.0, 0.0};
  opts.lambda = 1.0;
  opts.levels = 0;
  Model m = fit(X, y, opts);
  CHECK(m.weights(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
  RowMatrix q(1, 1);
  q << 0.3;
  CHECK(predict(m, q)[0] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("hierarchical fit equals dense ridge regression with the same kernel") {
  const int n = 256;
  RowMatrix X = random_points(n, 3, 901);
  VectorXd y = smooth_targets(X);
  FitOptions opts;
  opts.spec = {KernelFamily::Gaussian, 0.8, 1e-4};
  opts.lambda = 0.01;
  opts.n0 = 32;
  opts.r = 16;
  opts.seed = 5;
  Model m = fit(X, y, opts);

  PartitionTree tree = build_tree(X, 32, 16, 5);
  MatrixXd G = reference::dense_hier(tree, X, opts.spec);
  G.diagonal().array() += opts.lambda - opts.spec.jitter;
  VectorXd w_dense = G.llt().solve(y);
  CHECK((m.weights.col(0) - w_dense).cwiseAbs().maxCoeff() <= 1e-6);

  RowMatrix Q = random_points(40, 3, 902);
  VectorXd pred = predict(m, Q);
  for (int i = 0; i < 40; ++i) {
    const double want =
        w_dense.dot(reference::dense_oos_column(tree, X, opts.spec, Q.row(i).data(), 3));
    CHECK(pred[i] == doctest::Approx(want).epsilon(1e-6));
  }
}

TEST_CASE("zero targets give zero weights and zero predictions") {
  RowMatrix X = random_points(48, 2, 899);
  FitOptions opts;
  opts.spec = {KernelFamily::Gaussian, 0.8, 1e-5};
  opts.lambda = 0.01;
  opts.levels = 2;
  for (Method method : {Method::Hierarchical, Method::Nystrom, Method::Fourier,
                        Method::Independent}) {
    opts.method = method;
    Model m = fit(X, VectorXd::Zero(48), opts);
    if (m.weights.size() > 0) CHECK(m.weights.cwiseAbs().maxCoeff() == 0.0);
    if (m.coef.size() > 0) CHECK(m.coef.cwiseAbs().maxCoeff() == 0.0);
    CHECK(predict(m, random_points(7, 2, 898)).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("strong regularization shrinks predictions toward zero") {
  RowMatrix X = random_points(64, 2, 903);
  VectorXd y = smooth_targets(X);
  y.array() -= y.mean();
  FitOptions opts;
  opts.spec = {KernelFamily::Gaussian, 0.8, 0.0};
  opts.levels = 2;
  opts.lambda = 1e8;
  Model m = fit(X, y, opts);
  VectorXd pred = predict(m, X);
  CHECK(evaluate(pred, y, Task::Regression) == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("independent kernel near-interpolates within leaves at tiny lambda") {
  const int n = 100;
  RowMatrix X = random_points(n, 2, 904);
  VectorXd y = smooth_targets(X);
  FitOptions opts;
  opts.method = Method::Independent;
  opts.spec = {KernelFamily::Gaussian, 0.9, 1e-8};
  opts.lambda = 1e-6;
  opts.n0 = 25;
  opts.r = 10;
  Model m = fit(X, y, opts);
  VectorXd pred = predict(m, X);
  CHECK(evaluate(pred, y, Task::Regression) <= 0.05);

  // per-leaf weights match a dense per-block solve
  PartitionTree tree = build_tree(X, 25, 10, 0);
  const TreeNode& leaf = tree.nodes[tree.leaf_ids().front()];
  IndexVec pts = tree.node_points(leaf.id);
  MatrixXd G = kernel_gram(opts.spec, X, pts);
  G.diagonal().array() += opts.lambda - opts.spec.jitter;
  VectorXd rhs(pts.size());
  for (size_t a = 0; a < pts.size(); ++a) rhs[a] = y[pts[a]];
  VectorXd w_leaf = G.llt().solve(rhs);
  for (size_t a = 0; a < pts.size(); ++a)
    CHECK(m.weights(pts[a], 0) == doctest::Approx(w_leaf[a]).epsilon(1e-9));
}

TEST_CASE("feature-space methods match their dense kernel ridge solutions") {
  const int n = 120;
  RowMatrix X = random_points(n, 3, 905);
  VectorXd y = smooth_targets(X);

  SUBCASE("nystrom") {
    FitOptions opts;
    opts.method = Method::Nystrom;
    opts.spec = {KernelFamily::Gaussian, 0.8, 1e-7};
    opts.lambda = 0.01;
    opts.n0 = 20;
    opts.r = 20;
    opts.seed = 3;
    Model m = fit(X, y, opts);

    IndexVec lm = SplitMix64(3).sample_without_replacement(n, 20);
    std::sort(lm.begin(), lm.end());
    MatrixXd G = nystrom_gram(opts.spec, X, lm);
    G.diagonal().array() += opts.lambda - opts.spec.jitter;
    VectorXd w_dense = G.llt().solve(y);

    RowMatrix Q = random_points(15, 3, 906);
    VectorXd pred = predict(m, Q);
    for (int i = 0; i < 15; ++i) {
      // dense route: k_nys(X, q) = Phi * phi(q)
      NystromFactor f = nystrom_factor(opts.spec, X, lm);
      VectorXd col(n);
      VectorXd kq(lm.size());
      for (size_t t = 0; t < lm.size(); ++t)
        kq[t] = kernel_eval(opts.spec, X.row(lm[t]).transpose(), Q.row(i).transpose());
      VectorXd phiq = f.chol.triangularView<Eigen::Lower>().solve(kq);
      col = f.phi * phiq;
      CHECK(pred[i] == doctest::Approx(w_dense.dot(col)).epsilon(1e-8));
    }
  }
  SUBCASE("fourier") {
    FitOptions opts;
    opts.method = Method::Fourier;
    opts.spec = {KernelFamily::Gaussian, 0.8, 0.0};
    opts.lambda = 0.01;
    opts.n0 = 32;
    opts.r = 32;
    opts.seed = 4;
    Model m = fit(X, y, opts);

    RffMap map = rff_make(opts.spec, 32, 3, 4);
    MatrixXd phi = rff_features(map, X);
    MatrixXd G = phi * phi.transpose();
    G.diagonal().array() += opts.lambda;
    VectorXd w_dense = G.llt().solve(y);

    RowMatrix Q = random_points(15, 3, 907);
    VectorXd pred = predict(m, Q);
    MatrixXd phiq = rff_features(map, Q);
    for (int i = 0; i < 15; ++i)
      CHECK(pred[i] == doctest::Approx(w_dense.dot(phi * phiq.row(i).transpose())).epsilon(1e-8));
  }
}

TEST_CASE("classification tasks") {
  const int n = 200;
  RowMatrix X = random_points(n, 2, 908);

  SUBCASE("binary sign rule recovers a separable labeling") {
    VectorXd y(n);
    for (int i = 0; i < n; ++i) y[i] = X(i, 0) + 0.2 * X(i, 1) > 0 ? 1.0 : -1.0;
    FitOptions opts;
    opts.task = Task::Binary;
    opts.spec = {KernelFamily::Gaussian, 0.5, 1e-6};
    opts.lambda = 1e-3;
    opts.levels = 2;
    Model m = fit(X, y, opts);
    CHECK(evaluate(predict(m, X), y, Task::Binary) >= 0.97);
  }
  SUBCASE("multiclass one-vs-all with argmax, ties to the lowest label") {
    VectorXd y(n);
    for (int i = 0; i < n; ++i)
      y[i] = X(i, 0) > 0.3 ? 2.0 : (X(i, 0) < -0.3 ? 0.0 : 1.0);
    FitOptions opts;
    opts.task = Task::Multiclass;
    opts.spec = {KernelFamily::Gaussian, 0.4, 1e-6};
    opts.lambda = 1e-3;
    opts.levels = 2;
    Model m = fit(X, y, opts);
    CHECK(m.class_labels == std::vector<double>{0.0, 1.0, 2.0});
    CHECK(m.weights.cols() == 3);
    CHECK(evaluate(predict(m, X), y, Task::Multiclass) >= 0.9);

    // adding a constant to every class score cannot change the argmax
    MatrixXd scores = predict_scores(m, X);
    int changed = 0;
    for (int i = 0; i < n; ++i) {
      int best = 0;
      for (int c = 1; c < 3; ++c)
        if (scores(i, c) > scores(i, best)) best = c;
      MatrixXd shifted = scores;
      shifted.row(i).array() += 3.7;
      int best2 = 0;
      for (int c = 1; c < 3; ++c)
        if (shifted(i, c) > shifted(i, best2)) best2 = c;
      changed += (best != best2);
    }
    CHECK(changed == 0);
  }
}

TEST_CASE("seven-class one-vs-all shares one inverted matrix") {
  const int n = 350;
  RowMatrix X = random_points(n, 2, 914);
  VectorXd y(n);
  for (int i = 0; i < n; ++i)
    y[i] = std::floor(3.5 * (X(i, 0) + 1.0));  // 7 bands over [-1, 1)
  FitOptions opts;
  opts.task = Task::Multiclass;
  opts.spec = {KernelFamily::Gaussian, 0.3, 1e-6};
  opts.lambda = 1e-3;
  opts.levels = 3;
  Model m = fit(X, y, opts);
  CHECK(m.class_labels.size() == 7);
  CHECK(m.weights.cols() == 7);
  CHECK(m.states.size() == 7);
  CHECK(evaluate(predict(m, X), y, Task::Multiclass) >= 0.85);
}

TEST_CASE("bit-reproducible under identical seed and order") {
  RowMatrix X = random_points(96, 3, 909);
  VectorXd y = smooth_targets(X);
  FitOptions opts;
  opts.spec = {KernelFamily::Laplace, 1.0, 1e-5};
  opts.lambda = 0.01;
  opts.levels = 3;
  opts.seed = 11;
  Model a = fit(X, y, opts);
  Model b = fit(X, y, opts);
  RowMatrix Q = random_points(25, 3, 910);
  VectorXd pa = predict(a, Q), pb = predict(b, Q);
  CHECK((pa - pb).cwiseAbs().maxCoeff() == 0.0);
}

#ifdef _OPENMP
TEST_CASE("predictions do not depend on the thread count") {
  RowMatrix X = random_points(200, 3, 915);
  VectorXd y = smooth_targets(X);
  FitOptions opts;
  opts.spec = {KernelFamily::Gaussian, 0.8, 1e-4};
  opts.lambda = 0.01;
  opts.levels = 3;
  Model m = fit(X, y, opts);
  RowMatrix Q = random_points(64, 3, 916);

  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  VectorXd serial = predict(m, Q);
  omp_set_num_threads(saved);
  VectorXd parallel = predict(m, Q);
  CHECK((serial - parallel).cwiseAbs().maxCoeff() == 0.0);
}
#endif

TEST_CASE("evaluate metrics") {
  VectorXd a(4), b(4);
  a << 1, 2, 3, 4;
  CHECK(evaluate(a, a, Task::Regression) == 0.0);
  CHECK(evaluate(VectorXd::Zero(4), a, Task::Regression) == 1.0);
  CHECK_THROWS_AS(evaluate(a, VectorXd::Zero(4), Task::Regression), Error);

  b << 1, 2, 3, 4;
  CHECK(evaluate(a, b, Task::Binary) == 1.0);
  b << 1, 2, 3, 5;
  CHECK(evaluate(a, b, Task::Multiclass) == 0.75);
}

TEST_CASE("dense GP posterior") {
  RowMatrix X = random_points(20, 2, 911);
  VectorXd y = smooth_targets(X);
  KernelSpec spec{KernelFamily::Gaussian, 1.0, 0.0};

  SUBCASE("interpolates at vanishing noise") {
    RowMatrix Q = X.topRows(5);
    GpPosterior post = gp_posterior_dense(X, y, Q, spec, 1e-10);
    for (int i = 0; i < 5; ++i) {
      CHECK(post.mean[i] == doctest::Approx(y[i]).epsilon(1e-5));
      CHECK(std::abs(post.covariance(i, i)) <= 1e-6);
    }
  }
  SUBCASE("zero targets give a zero mean") {
    RowMatrix Q = random_points(6, 2, 912);
    GpPosterior post = gp_posterior_dense(X, VectorXd::Zero(20), Q, spec, 0.1);
    CHECK(post.mean.norm() == 0.0);
  }
  SUBCASE("mean agrees with the fitted dense predictor") {
    RowMatrix Q = random_points(6, 2, 913);
    GpPosterior post = gp_posterior_dense(X, y, Q, spec, 0.05);
    FitOptions opts;
    opts.spec = spec;
    opts.lambda = 0.05;
    opts.levels = 0;  // single leaf: exact dense kernel
    Model m = fit(X, y, opts);
    VectorXd pred = predict(m, Q);
    for (int i = 0; i < 6; ++i) CHECK(pred[i] == doctest::Approx(post.mean[i]).epsilon(1e-9));
  }
}
