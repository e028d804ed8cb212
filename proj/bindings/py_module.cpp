#include "hck/kpca.hpp"
#include "hck/learner.hpp"
#include "hck/model_io.hpp"
#include "hck/reference.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace hck;

namespace {

FitOptions make_options(const std::string& method, const std::string& kernel, double sigma,
                        double jitter, double lambda, const std::string& task, int levels, int n0,
                        int r, std::uint64_t seed) {
  FitOptions opts;
  opts.method = method_from_name(method);
  opts.spec = KernelSpec{family_from_name(kernel), sigma, jitter};
  opts.lambda = lambda;
  opts.task = task_from_name(task);
  opts.levels = levels;
  opts.n0 = n0;
  opts.r = r;
  opts.seed = seed;
  return opts;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Hierarchically compositional kernel learning";

  py::register_exception<Error>(m, "HckError");

  py::class_<Model>(m, "Model")
      .def_property_readonly("method", [](const Model& mm) { return method_name(mm.method); })
      .def_property_readonly("task", [](const Model& mm) { return task_name(mm.task); })
      .def_property_readonly("lambda_", [](const Model& mm) { return mm.lambda; })
      .def_property_readonly("sigma", [](const Model& mm) { return mm.spec.sigma; })
      .def_property_readonly("jitter", [](const Model& mm) { return mm.spec.jitter; })
      .def_property_readonly("kernel", [](const Model& mm) { return family_name(mm.spec.family); })
      .def_property_readonly("rank", [](const Model& mm) { return mm.r; })
      .def_property_readonly("leaf_capacity", [](const Model& mm) { return mm.n0; })
      .def_property_readonly("class_labels", [](const Model& mm) { return mm.class_labels; })
      .def_property_readonly("weights", [](const Model& mm) { return mm.weights; })
      .def("predict", [](const Model& mm, const RowMatrix& X) { return predict(mm, X); },
           py::arg("X"))
      .def("predict_scores",
           [](const Model& mm, const RowMatrix& X) { return predict_scores(mm, X); },
           py::arg("X"))
      .def("save", [](const Model& mm, const std::string& path) { save_model(mm, path); },
           py::arg("path"));

  m.def(
      "fit",
      [](const RowMatrix& X, const VectorXd& y, const std::string& method,
         const std::string& kernel, double sigma, double lambda, double jitter,
         const std::string& task, int levels, int n0, int r, std::uint64_t seed) {
        return fit(X, y,
                   make_options(method, kernel, sigma, jitter, lambda, task, levels, n0, r, seed));
      },
      py::arg("X"), py::arg("y"), py::arg("method") = "hier", py::arg("kernel") = "gaussian",
      py::arg("sigma") = 1.0, py::arg("lambda_") = 0.01, py::arg("jitter") = 0.0,
      py::arg("task") = "reg", py::arg("levels") = -1, py::arg("n0") = -1, py::arg("rank") = -1,
      py::arg("seed") = 0);

  m.def("load_model", &load_model, py::arg("path"));

  m.def(
      "evaluate",
      [](const VectorXd& pred, const VectorXd& truth, const std::string& task) {
        return evaluate(pred, truth, task_from_name(task));
      },
      py::arg("pred"), py::arg("truth"), py::arg("task"));

  m.def("levels_to_sizes", &levels_to_sizes, py::arg("n"), py::arg("levels"));

  m.def(
      "kernel_gram",
      [](const std::string& kernel, double sigma, double jitter, const RowMatrix& X) {
        KernelSpec spec{family_from_name(kernel), sigma, jitter};
        IndexVec idx(X.rows());
        for (int i = 0; i < static_cast<int>(idx.size()); ++i) idx[i] = i;
        return kernel_gram(spec, X, idx);
      },
      py::arg("kernel"), py::arg("sigma"), py::arg("jitter"), py::arg("X"));

  m.def(
      "hier_gram",
      [](const RowMatrix& X, const std::string& kernel, double sigma, double jitter, int levels,
         std::uint64_t seed) {
        KernelSpec spec{family_from_name(kernel), sigma, jitter};
        auto [n0, r] = levels_to_sizes(static_cast<int>(X.rows()), levels);
        PartitionTree tree = build_tree(X, n0, r, seed);
        HierFactors H = assemble(tree, X, spec);
        return materialize(H, tree, 8192);
      },
      py::arg("X"), py::arg("kernel") = "gaussian", py::arg("sigma") = 1.0,
      py::arg("jitter") = 1e-8, py::arg("levels") = 3, py::arg("seed") = 0,
      "Dense hierarchical kernel matrix (capped size; mainly for inspection and kPCA)");

  m.def("kpca_embed", &kpca_embed, py::arg("gram"), py::arg("dim"), py::arg("cap") = 8192);
  m.def("alignment_diff", &alignment_diff, py::arg("U"), py::arg("U_approx"));

  m.def(
      "gp_posterior",
      [](const RowMatrix& X, const VectorXd& y, const RowMatrix& Xstar,
         const std::string& kernel, double sigma, double lambda, double jitter, int cap) {
        KernelSpec spec{family_from_name(kernel), sigma, jitter};
        GpPosterior post = gp_posterior_dense(X, y, Xstar, spec, lambda, cap);
        return py::make_tuple(post.mean, post.covariance);
      },
      py::arg("X"), py::arg("y"), py::arg("X_star"), py::arg("kernel") = "gaussian",
      py::arg("sigma") = 1.0, py::arg("lambda_") = 0.01, py::arg("jitter") = 0.0,
      py::arg("cap") = 4096,
      "Dense GP posterior mean and covariance with the exact base kernel (capped size)");
}
