#include "hck/kpca.hpp"
#include "hck/learner.hpp"
#include "hck/model_io.hpp"
#include "hck/rng.hpp"

#include "CLI11.hpp"

#include <chrono>
#include <cstdio>
#include <optional>

using namespace hck;

namespace {

struct CommonArgs {
  std::string method = "hier";
  std::string kernel = "gaussian";
  double sigma = 1.0;
  double lambda = 0.01;
  double jitter = -1.0;  // default lambda/10
  int levels = -1;
  int n0 = -1;
  int rank = -1;
  std::uint64_t seed = 0;
  std::string task = "reg";
  bool no_normalize = false;
};

void add_common(CLI::App* cmd, CommonArgs& a) {
  cmd->add_option("--method", a.method, "hier|nystrom|rff|indep")->default_val("hier");
  cmd->add_option("--kernel", a.kernel, "gaussian|laplace|invmq")->default_val("gaussian");
  cmd->add_option("--sigma", a.sigma, "kernel range parameter");
  cmd->add_option("--lambda", a.lambda, "ridge regularization");
  cmd->add_option("--jitter", a.jitter, "diagonal stabilizer (default lambda/10, must be < lambda)");
  cmd->add_option("--levels", a.levels, "tree levels j; sets n0=ceil(n/2^j), r=floor(n/2^j)");
  cmd->add_option("--n0", a.n0, "leaf capacity (with --rank)");
  cmd->add_option("--rank", a.rank, "per-level rank (with --n0)");
  cmd->add_option("--seed", a.seed, "RNG seed");
  cmd->add_option("--task", a.task, "reg|bin|multi")->default_val("reg");
  cmd->add_flag("--no-normalize", a.no_normalize, "skip min-max scaling to [-1,1]");
}

FitOptions to_options(const CommonArgs& a) {
  FitOptions opts;
  opts.method = method_from_name(a.method);
  const double jitter = a.jitter >= 0.0 ? a.jitter : a.lambda / 10.0;
  opts.spec = KernelSpec{family_from_name(a.kernel), a.sigma, jitter};
  opts.lambda = a.lambda;
  opts.task = task_from_name(a.task);
  opts.levels = a.levels;
  opts.n0 = a.n0;
  opts.r = a.rank;
  opts.seed = a.seed;
  return opts;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  size_t pos = 0;
  while (pos < text.size()) {
    size_t next = text.find(',', pos);
    if (next == std::string::npos) next = text.size();
    out.push_back(std::strtod(text.substr(pos, next - pos).c_str(), nullptr));
    pos = next + 1;
  }
  require(!out.empty(), "empty value list");
  return out;
}

// "sigma=0.1,0.3;lambda=0.001,0.01"
struct Grid {
  std::vector<double> sigmas;
  std::vector<double> lambdas;
};

Grid parse_grid(const std::string& text, double sigma0, double lambda0) {
  Grid g{{sigma0}, {lambda0}};
  size_t pos = 0;
  while (pos < text.size()) {
    size_t next = text.find(';', pos);
    if (next == std::string::npos) next = text.size();
    const std::string part = text.substr(pos, next - pos);
    const size_t eq = part.find('=');
    require(eq != std::string::npos, "grid entries look like key=v1,v2");
    const std::string key = part.substr(0, eq);
    if (key == "sigma")
      g.sigmas = parse_list(part.substr(eq + 1));
    else if (key == "lambda")
      g.lambdas = parse_list(part.substr(eq + 1));
    else
      throw Error("unknown grid key: " + key);
    pos = next + 1;
  }
  return g;
}

bool better_metric(double a, double b, Task task) {
  return task == Task::Regression ? a < b : a > b;
}

struct Csv {
  std::FILE* f = nullptr;
  explicit Csv(const std::string& path) {
    if (!path.empty()) {
      f = std::fopen(path.c_str(), "w");
      require(f != nullptr, "cannot write " + path);
    }
  }
  ~Csv() {
    if (f) std::fclose(f);
  }
  void line(const std::string& s) {
    if (f) std::fprintf(f, "%s\n", s.c_str());
  }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void split_dataset(Dataset& train, Dataset& test, double fraction, std::uint64_t split_seed) {
  require(fraction > 0.0 && fraction < 1.0, "--split must be in (0,1)");
  const int n = train.n();
  const int n_test = std::max(1, static_cast<int>(n * fraction));
  IndexVec order = SplitMix64(split_seed).sample_without_replacement(n, n);
  Dataset tr, te;
  tr.points = RowMatrix(n - n_test, train.d());
  tr.targets = VectorXd(n - n_test);
  te.points = RowMatrix(n_test, train.d());
  te.targets = VectorXd(n_test);
  for (int i = 0; i < n - n_test; ++i) {
    tr.points.row(i) = train.points.row(order[i]);
    tr.targets[i] = train.targets[order[i]];
  }
  for (int i = 0; i < n_test; ++i) {
    te.points.row(i) = train.points.row(order[n - n_test + i]);
    te.targets[i] = train.targets[order[n - n_test + i]];
  }
  train = std::move(tr);
  test = std::move(te);
}

int cmd_train(const CommonArgs& args, const std::string& train_path, const std::string& test_path,
              const std::string& model_path, const std::string& grid_text,
              const std::string& out_path, double split, std::uint64_t split_seed) {
  Dataset train = parse_libsvm(train_path);
  Dataset test;
  bool have_test = !test_path.empty();
  if (have_test) {
    test = parse_libsvm(test_path);
    reconcile_dims(train, test);
  } else if (split > 0.0) {
    split_dataset(train, test, split, split_seed);
    have_test = true;
  }
  NormStats stats = preprocess(train, have_test ? &test : nullptr, !args.no_normalize);

  FitOptions base = to_options(args);
  Csv csv(out_path);
  csv.line("method,kernel,sigma,lambda,jitter,n0,rank,seed,metric");

  std::optional<Model> best;
  double best_metric = 0.0;
  Grid grid = grid_text.empty() ? Grid{{args.sigma}, {args.lambda}}
                                : parse_grid(grid_text, args.sigma, args.lambda);
  require(grid_text.empty() || have_test, "--grid needs held-out data (--test or --split)");

  for (double sigma : grid.sigmas) {
    for (double lambda : grid.lambdas) {
      FitOptions opts = base;
      opts.spec.sigma = sigma;
      opts.lambda = lambda;
      opts.spec.jitter = args.jitter >= 0.0 ? args.jitter : lambda / 10.0;
      Model model = fit(train, opts);
      model.norm = stats;
      double metric = std::numeric_limits<double>::quiet_NaN();
      if (have_test) {
        metric = evaluate(predict(model, test.points), test.targets, opts.task);
      }
      std::printf("train method=%s sigma=%s lambda=%s metric=%s build_s=%.3f solve_s=%.3f\n",
                  args.method.c_str(), fmt(sigma).c_str(), fmt(lambda).c_str(),
                  fmt(metric).c_str(), model.fit_stats.build_seconds,
                  model.fit_stats.solve_seconds);
      csv.line(args.method + "," + args.kernel + "," + fmt(sigma) + "," + fmt(lambda) + "," +
               fmt(opts.spec.jitter) + "," + std::to_string(model.n0) + "," +
               std::to_string(model.r) + "," + std::to_string(opts.seed) + "," + fmt(metric));
      if (!best || !have_test || better_metric(metric, best_metric, opts.task)) {
        best = std::move(model);
        best_metric = metric;
      }
    }
  }

  if (have_test)
    std::printf("best metric=%s (sigma=%s lambda=%s)\n", fmt(best_metric).c_str(),
                fmt(best->spec.sigma).c_str(), fmt(best->lambda).c_str());
  if (!model_path.empty()) {
    save_model(*best, model_path);
    std::printf("model written to %s\n", model_path.c_str());
  }
  return 0;
}

int cmd_predict(const std::string& model_path, const std::string& test_path,
                const std::string& out_path) {
  Model model = load_model(model_path);
  Dataset test = parse_libsvm(test_path);
  if (model.norm.enabled) {
    require(test.d() <= model.norm.min.size(), "test data wider than the model's attributes");
    if (test.d() < model.norm.min.size()) {
      RowMatrix grown = RowMatrix::Zero(test.n(), model.norm.min.size());
      grown.leftCols(test.d()) = test.points;
      test.points = std::move(grown);
    }
    apply_normalization(model.norm, test.points);
  }
  VectorXd pred = predict(model, test.points);
  Csv csv(out_path);
  csv.line("index,prediction");
  for (int i = 0; i < pred.size(); ++i) csv.line(std::to_string(i) + "," + fmt(pred[i]));
  if (out_path.empty())
    for (int i = 0; i < pred.size(); ++i) std::printf("%d,%s\n", i, fmt(pred[i]).c_str());
  else
    std::printf("predictions written to %s\n", out_path.c_str());
  return 0;
}

int cmd_eval(const std::string& model_path, const std::string& test_path,
             const std::string& out_path) {
  Model model = load_model(model_path);
  Dataset test = parse_libsvm(test_path);
  if (model.norm.enabled) {
    require(test.d() <= model.norm.min.size(), "test data wider than the model's attributes");
    if (test.d() < model.norm.min.size()) {
      RowMatrix grown = RowMatrix::Zero(test.n(), model.norm.min.size());
      grown.leftCols(test.d()) = test.points;
      test.points = std::move(grown);
    }
    apply_normalization(model.norm, test.points);
  }
  const double metric = evaluate(predict(model, test.points), test.targets, model.task);
  std::printf("metric %s\n", fmt(metric).c_str());
  Csv csv(out_path);
  csv.line("metric");
  csv.line(fmt(metric));
  return 0;
}

int cmd_bench(const CommonArgs& args, const std::string& train_path, const std::string& test_path,
              const std::string& ranks_text, int n_steps, const std::string& out_path) {
  Dataset train = parse_libsvm(train_path);
  Dataset test;
  const bool have_test = !test_path.empty();
  if (have_test) {
    test = parse_libsvm(test_path);
    reconcile_dims(train, test);
  }
  preprocess(train, have_test ? &test : nullptr, !args.no_normalize);

  std::vector<double> rank_values = parse_list(ranks_text);
  IndexVec order = SplitMix64(args.seed ^ 0x5EEDULL).sample_without_replacement(train.n(), train.n());

  Csv csv(out_path);
  const std::string header = "method,n,r,build_s,invert_s,predict_s,floats_stored,metric";
  csv.line(header);
  if (out_path.empty()) std::printf("%s\n", header.c_str());

  for (int step = 0; step < std::max(1, n_steps); ++step) {
    const int n = train.n() >> step;
    if (n < 2) break;
    Dataset sub;
    sub.points = RowMatrix(n, train.d());
    sub.targets = VectorXd(n);
    for (int i = 0; i < n; ++i) {
      sub.points.row(i) = train.points.row(order[i]);
      sub.targets[i] = train.targets[order[i]];
    }
    for (double rv : rank_values) {
      const int r = static_cast<int>(rv);
      if (r > n / 2) continue;
      FitOptions opts = to_options(args);
      opts.levels = -1;
      opts.n0 = r;
      opts.r = r;
      Model model = fit(sub, opts);
      double predict_s = 0.0;
      double metric = std::numeric_limits<double>::quiet_NaN();
      if (have_test) {
        const auto t0 = std::chrono::steady_clock::now();
        VectorXd pred = predict(model, test.points);
        predict_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        metric = evaluate(pred, test.targets, opts.task);
      }
      const std::string row = args.method + "," + std::to_string(n) + "," + std::to_string(r) +
                              "," + fmt(model.fit_stats.build_seconds) + "," +
                              fmt(model.fit_stats.solve_seconds) + "," + fmt(predict_s) + "," +
                              std::to_string(model.fit_stats.floats_stored) + "," + fmt(metric);
      csv.line(row);
      if (out_path.empty()) std::printf("%s\n", row.c_str());
    }
  }
  return 0;
}

int cmd_kpca(const CommonArgs& args, const std::string& train_path, int dim, int subsample,
             const std::string& out_path) {
  Dataset train = parse_libsvm(train_path);
  preprocess(train, nullptr, !args.no_normalize);

  int n = train.n();
  RowMatrix X;
  if (subsample > 0 && subsample < n) {
    IndexVec order = SplitMix64(args.seed).sample_without_replacement(n, subsample);
    X = RowMatrix(subsample, train.d());
    for (int i = 0; i < subsample; ++i) X.row(i) = train.points.row(order[i]);
    n = subsample;
  } else {
    X = train.points;
  }

  const double jitter = args.jitter >= 0.0 ? args.jitter : 1e-8;
  KernelSpec spec{family_from_name(args.kernel), args.sigma, jitter};
  KernelSpec exact = spec;
  exact.jitter = 0.0;

  IndexVec all(n);
  for (int i = 0; i < n; ++i) all[i] = i;
  MatrixXd exact_gram = kernel_gram(exact, X, all);
  MatrixXd U = kpca_embed(exact_gram, dim);

  int n0 = args.n0, r = args.rank;
  if (args.levels >= 0) std::tie(n0, r) = levels_to_sizes(n, args.levels);
  require(n0 > 0 && r > 0, "kpca: sizing needs either --levels or --n0 and --rank");

  MatrixXd approx_gram;
  const Method method = method_from_name(args.method);
  switch (method) {
    case Method::Hierarchical: {
      PartitionTree tree = build_tree(X, n0, r, args.seed);
      approx_gram = materialize(assemble(tree, X, spec), tree, 8192);
      break;
    }
    case Method::Nystrom: {
      IndexVec lm = SplitMix64(args.seed).sample_without_replacement(n, r);
      approx_gram = nystrom_gram(spec, X, lm);
      break;
    }
    case Method::Fourier: {
      RffMap map = rff_make(exact, r, train.d(), args.seed);
      MatrixXd phi = rff_features(map, X);
      approx_gram = phi * phi.transpose();
      break;
    }
    case Method::Independent: {
      PartitionTree tree = build_tree(X, n0, r, args.seed);
      approx_gram = independent_dense(independent_gram(spec, X, tree), tree);
      break;
    }
  }
  MatrixXd Ut = kpca_embed(approx_gram, dim);
  const double diff = alignment_diff(U, Ut);
  std::printf("n,%d\nsubsample_seed,%llu\nalignment_diff,%s\n", n,
              static_cast<unsigned long long>(args.seed), fmt(diff).c_str());

  Csv csv(out_path);
  std::string header = "index";
  for (int j = 1; j <= dim; ++j) header += ",exact_" + std::to_string(j);
  for (int j = 1; j <= dim; ++j) header += ",approx_" + std::to_string(j);
  csv.line(header);
  for (int i = 0; i < n; ++i) {
    std::string row = std::to_string(i);
    for (int j = 0; j < dim; ++j) row += "," + fmt(U(i, j));
    for (int j = 0; j < dim; ++j) row += "," + fmt(Ut(i, j));
    csv.line(row);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hierarchically compositional kernel learning"};
  app.require_subcommand(1);

  CommonArgs targs, bargs, kargs;
  std::string train_path, test_path, model_path, grid_text, out_path, ranks_text = "32";
  double split = 0.0;
  std::uint64_t split_seed = 0;
  int n_steps = 3, dim = 3, subsample = 2000;

  CLI::App* train = app.add_subcommand("train", "fit a model, optionally over a parameter grid");
  add_common(train, targs);
  train->add_option("--train", train_path, "libsvm training file")->required();
  train->add_option("--test", test_path, "libsvm held-out file");
  train->add_option("--model", model_path, "output model path");
  train->add_option("--grid", grid_text, "e.g. \"sigma=0.1,1,10;lambda=0.001,0.01\"");
  train->add_option("--out", out_path, "CSV of grid results");
  train->add_option("--split", split, "hold out this fraction when no --test is given");
  train->add_option("--split-seed", split_seed, "seed for the 4:1-style split");

  std::string p_model, p_test, p_out;
  CLI::App* predict = app.add_subcommand("predict", "predict with a saved model");
  predict->add_option("--model", p_model)->required();
  predict->add_option("--test", p_test)->required();
  predict->add_option("--out", p_out, "CSV output (stdout when omitted)");

  std::string e_model, e_test, e_out;
  CLI::App* eval = app.add_subcommand("eval", "evaluate a saved model on labeled data");
  eval->add_option("--model", e_model)->required();
  eval->add_option("--test", e_test)->required();
  eval->add_option("--out", e_out);

  std::string b_train, b_test, b_out;
  CLI::App* bench = app.add_subcommand("bench", "sweep n (factors of two) and r, emit timings");
  add_common(bench, bargs);
  bench->add_option("--train", b_train)->required();
  bench->add_option("--test", b_test);
  bench->add_option("--ranks", ranks_text, "comma-separated rank list");
  bench->add_option("--n-steps", n_steps, "how many factor-of-two subsamples");
  bench->add_option("--out", b_out);

  std::string k_train, k_out;
  CLI::App* kpca = app.add_subcommand("kpca", "embeddings and alignment vs the exact kernel");
  add_common(kpca, kargs);
  kpca->add_option("--train", k_train)->required();
  kpca->add_option("--dim", dim, "embedding dimension");
  kpca->add_option("--subsample", subsample, "subsample size (0 = all)");
  kpca->add_option("--out", k_out, "embeddings CSV");

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed())
      return cmd_train(targs, train_path, test_path, model_path, grid_text, out_path, split,
                       split_seed);
    if (predict->parsed()) return cmd_predict(p_model, p_test, p_out);
    if (eval->parsed()) return cmd_eval(e_model, e_test, e_out);
    if (bench->parsed()) return cmd_bench(bargs, b_train, b_test, ranks_text, n_steps, b_out);
    if (kpca->parsed()) return cmd_kpca(kargs, k_train, dim, subsample, k_out);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
