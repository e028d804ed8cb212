#include "hck/model_io.hpp"

#include <charconv>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

namespace hck {

namespace {

constexpr char kMagic[4] = {'H', 'C', 'K', 'M'};
constexpr std::uint32_t kVersion = 1;

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ---- binary writing ----

struct Writer {
  std::ostringstream buf;

  void u8(std::uint8_t v) { buf.write(reinterpret_cast<const char*>(&v), 1); }
  void u32(std::uint32_t v) { buf.write(reinterpret_cast<const char*>(&v), 4); }
  void u64(std::uint64_t v) { buf.write(reinterpret_cast<const char*>(&v), 8); }
  void i32(std::int32_t v) { buf.write(reinterpret_cast<const char*>(&v), 4); }
  void f64(double v) { buf.write(reinterpret_cast<const char*>(&v), 8); }

  void matrix(const MatrixXd& M) {
    u64(M.rows());
    u64(M.cols());
    for (Eigen::Index i = 0; i < M.rows(); ++i)
      for (Eigen::Index j = 0; j < M.cols(); ++j) f64(M(i, j));
  }
  void vec(const VectorXd& v) { matrix(v); }
  void ints(const IndexVec& v) {
    u64(v.size());
    for (int x : v) i32(x);
  }
};

// ---- binary reading with bounds checks ----

struct Reader {
  const char* p;
  const char* end;
  std::string ctx;

  void need(size_t k) const {
    if (static_cast<size_t>(end - p) < k) throw Error(ctx + ": truncated payload");
  }
  std::uint8_t u8() {
    need(1);
    return static_cast<std::uint8_t>(*p++);
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v;
    std::memcpy(&v, p, 4);
    p += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v;
    std::memcpy(&v, p, 8);
    p += 8;
    return v;
  }
  std::int32_t i32() {
    need(4);
    std::int32_t v;
    std::memcpy(&v, p, 4);
    p += 4;
    return v;
  }
  double f64() {
    need(8);
    double v;
    std::memcpy(&v, p, 8);
    p += 8;
    return v;
  }
  MatrixXd matrix() {
    const auto rows = u64(), cols = u64();
    require(rows <= (1ULL << 28) && cols <= (1ULL << 28), ctx + ": bad matrix shape");
    need(rows * cols * 8);
    MatrixXd M(rows, cols);
    for (std::uint64_t i = 0; i < rows; ++i)
      for (std::uint64_t j = 0; j < cols; ++j) M(i, j) = f64();
    return M;
  }
  VectorXd vec() {
    MatrixXd M = matrix();
    require(M.cols() <= 1, ctx + ": expected a vector");
    return M.cols() == 1 ? VectorXd(M.col(0)) : VectorXd(0);
  }
  IndexVec ints() {
    const auto k = u64();
    require(k <= (1ULL << 30), ctx + ": bad array length");
    need(k * 4);
    IndexVec v(k);
    for (auto& x : v) x = i32();
    return v;
  }
};

void write_tree(Writer& w, const PartitionTree& tree) {
  w.u64(tree.nodes.size());
  for (const TreeNode& nd : tree.nodes) {
    w.i32(nd.parent);
    w.i32(nd.left);
    w.i32(nd.right);
    w.i32(nd.lo);
    w.i32(nd.hi);
    w.u8(nd.is_leaf() ? 0 : 1);
    if (!nd.is_leaf()) {
      w.vec(nd.direction);
      w.f64(nd.threshold);
      w.ints(nd.landmarks);
    }
  }
  w.ints(tree.perm);
}

PartitionTree read_tree(Reader& r, int n0, int rank, std::uint64_t seed, int dim) {
  PartitionTree tree;
  tree.n0 = n0;
  tree.r = rank;
  tree.seed = seed;
  tree.dim = dim;
  const auto nn = r.u64();
  tree.nodes.resize(nn);
  for (std::uint64_t i = 0; i < nn; ++i) {
    TreeNode& nd = tree.nodes[i];
    nd.id = static_cast<int>(i);
    nd.parent = r.i32();
    nd.left = r.i32();
    nd.right = r.i32();
    nd.lo = r.i32();
    nd.hi = r.i32();
    if (r.u8() != 0) {
      nd.direction = r.vec();
      nd.threshold = r.f64();
      nd.landmarks = r.ints();
    }
  }
  tree.perm = r.ints();
  return tree;
}

void write_factors(Writer& w, const Model& m) {
  const auto nn = m.tree.nodes.size();
  for (size_t i = 0; i < nn; ++i) w.matrix(m.oos_factors.W[i]);
  for (size_t i = 0; i < nn; ++i) w.matrix(m.oos_factors.gram_chol[i]);
  for (const OosState& st : m.states) {
    w.vec(st.w);
    w.u64(st.e.size());
    for (const VectorXd& v : st.e) w.vec(v);
    for (const VectorXd& v : st.c) w.vec(v);
  }
}

void read_factors(Reader& r, Model& m, int outputs) {
  const auto nn = m.tree.nodes.size();
  m.oos_factors.W.resize(nn);
  m.oos_factors.gram_chol.resize(nn);
  for (size_t i = 0; i < nn; ++i) m.oos_factors.W[i] = r.matrix();
  for (size_t i = 0; i < nn; ++i) m.oos_factors.gram_chol[i] = r.matrix();
  m.states.resize(outputs);
  m.weights.resize(m.tree.n(), outputs);
  for (int c = 0; c < outputs; ++c) {
    OosState& st = m.states[c];
    st.w = r.vec();
    require(st.w.size() == m.tree.n(), "model: weight length mismatch");
    m.weights.col(c) = st.w;
    const auto k = r.u64();
    st.e.resize(k);
    st.c.resize(k);
    for (auto& v : st.e) v = r.vec();
    for (auto& v : st.c) v = r.vec();
  }
}

void begin_section(std::ofstream& out, const std::string& payload) {
  std::uint64_t len = payload.size();
  out.write(reinterpret_cast<const char*>(&len), 8);
  out.write(payload.data(), payload.size());
}

}  // namespace

void save_model(const Model& model, const std::string& path) {
  std::ostringstream header;
  header << "method " << method_name(model.method) << "\n"
         << "kernel " << family_name(model.spec.family) << "\n"
         << "sigma " << fmt_double(model.spec.sigma) << "\n"
         << "lambda " << fmt_double(model.lambda) << "\n"
         << "jitter " << fmt_double(model.spec.jitter) << "\n"
         << "task " << task_name(model.task) << "\n"
         << "seed " << model.seed << "\n"
         << "levels " << model.levels << "\n"
         << "n0 " << model.n0 << "\n"
         << "rank " << model.r << "\n"
         << "dim "
         << (model.method == Method::Nystrom  ? model.nystrom.landmark_points.cols()
             : model.method == Method::Fourier ? model.rff.omegas.cols()
                                               : model.train_points.cols())
         << "\n"
         << "n " << model.train_points.rows() << "\n"
         << "outputs " << model.outputs() << "\n";
  header << "labels";
  for (double v : model.class_labels) header << " " << fmt_double(v);
  header << "\n";

  std::ofstream out(path, std::ios::binary);
  require(out.good(), "cannot write " + path);
  out.write(kMagic, 4);
  out.write(reinterpret_cast<const char*>(&kVersion), 4);
  const std::string htext = header.str();
  begin_section(out, htext);

  {
    Writer w;
    w.u8(model.norm.enabled ? 1 : 0);
    if (model.norm.enabled) {
      w.vec(model.norm.min);
      w.vec(model.norm.max);
    }
    begin_section(out, w.buf.str());
  }

  Writer w;
  switch (model.method) {
    case Method::Hierarchical:
      w.matrix(model.train_points);
      write_tree(w, model.tree);
      write_factors(w, model);
      break;
    case Method::Independent:
      w.matrix(model.train_points);
      write_tree(w, model.tree);
      w.matrix(model.weights);
      break;
    case Method::Nystrom:
      w.matrix(model.nystrom.landmark_points);
      w.matrix(model.nystrom.chol);
      w.matrix(model.coef);
      break;
    case Method::Fourier:
      w.matrix(model.rff.omegas);
      w.vec(model.rff.phases);
      w.f64(model.rff.scale);
      w.matrix(model.coef);
      break;
  }
  begin_section(out, w.buf.str());
  require(out.good(), "write failed: " + path);
}

Model load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), "cannot open " + path);
  std::string blob((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  require(blob.size() >= 8, path + ": not a model file");
  require(std::memcmp(blob.data(), kMagic, 4) == 0, path + ": not a model file");
  std::uint32_t version;
  std::memcpy(&version, blob.data() + 4, 4);
  require(version == kVersion, path + ": unsupported model version " + std::to_string(version) +
                                   " (supported: " + std::to_string(kVersion) + ")");

  Reader top{blob.data() + 8, blob.data() + blob.size(), path};
  auto next_section = [&](const std::string& name) -> Reader {
    top.ctx = path + " [" + name + "]";
    const auto len = top.u64();
    top.need(len);
    Reader r{top.p, top.p + len, path + " [" + name + "]"};
    top.p += len;
    return r;
  };

  Reader hdr = next_section("header");
  std::map<std::string, std::string> kv;
  {
    std::istringstream hs(std::string(hdr.p, hdr.end));
    std::string line;
    while (std::getline(hs, line)) {
      const auto sp = line.find(' ');
      if (sp == std::string::npos)
        kv[line] = "";
      else
        kv[line.substr(0, sp)] = line.substr(sp + 1);
    }
  }
  auto field = [&](const std::string& key) -> std::string {
    auto it = kv.find(key);
    require(it != kv.end(), path + ": header missing field '" + key + "'");
    return it->second;
  };

  Model m;
  m.method = method_from_name(field("method"));
  m.spec.family = family_from_name(field("kernel"));
  m.spec.sigma = std::strtod(field("sigma").c_str(), nullptr);
  m.lambda = std::strtod(field("lambda").c_str(), nullptr);
  m.spec.jitter = std::strtod(field("jitter").c_str(), nullptr);
  m.task = task_from_name(field("task"));
  m.seed = std::strtoull(field("seed").c_str(), nullptr, 10);
  m.levels = std::atoi(field("levels").c_str());
  m.n0 = std::atoi(field("n0").c_str());
  m.r = std::atoi(field("rank").c_str());
  const int dim = std::atoi(field("dim").c_str());
  const int outputs = std::atoi(field("outputs").c_str());
  {
    std::istringstream ls(field("labels"));
    double v;
    while (ls >> v) m.class_labels.push_back(v);
  }

  Reader norm = next_section("normalization");
  if (norm.u8() != 0) {
    m.norm.enabled = true;
    m.norm.min = norm.vec();
    m.norm.max = norm.vec();
  }

  Reader body = next_section("payload");
  switch (m.method) {
    case Method::Hierarchical: {
      MatrixXd pts = body.matrix();
      m.train_points = pts;
      m.tree = read_tree(body, m.n0, m.r, m.seed, dim);
      read_factors(body, m, outputs);
      break;
    }
    case Method::Independent: {
      MatrixXd pts = body.matrix();
      m.train_points = pts;
      m.tree = read_tree(body, m.n0, m.r, m.seed, dim);
      m.weights = body.matrix();
      break;
    }
    case Method::Nystrom:
      m.nystrom.landmark_points = body.matrix();
      m.nystrom.chol = body.matrix();
      m.coef = body.matrix();
      break;
    case Method::Fourier:
      m.rff.omegas = body.matrix();
      m.rff.phases = body.vec();
      m.rff.scale = body.f64();
      m.coef = body.matrix();
      break;
  }
  require(body.p == body.end, path + ": trailing bytes in payload section");
  return m;
}

}  // namespace hck
