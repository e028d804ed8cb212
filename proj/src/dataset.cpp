#include "hck/dataset.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <unordered_map>

namespace hck {

namespace {

struct Triplet {
  int row;
  int col;
  double value;
};

[[noreturn]] void parse_fail(const std::string& path, size_t line_no, const std::string& what) {
  throw Error(path + ":" + std::to_string(line_no) + ": " + what);
}

double parse_double(const char*& p, const char* end, const std::string& path, size_t line_no) {
  char* stop = nullptr;
  errno = 0;
  const double v = std::strtod(p, &stop);
  if (stop == p || stop > end) parse_fail(path, line_no, "malformed number");
  if (!std::isfinite(v)) parse_fail(path, line_no, "non-finite value");
  p = stop;
  return v;
}

}  // namespace

Dataset parse_libsvm(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "cannot open " + path);

  std::vector<double> labels;
  std::vector<Triplet> triplets;
  int max_index = 0;

  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const char* p = line.c_str();
    const char* end = p + line.size();
    while (p < end && std::isspace(static_cast<unsigned char>(*p))) ++p;
    if (p == end || *p == '#') continue;

    const int row = static_cast<int>(labels.size());
    labels.push_back(parse_double(p, end, path, line_no));

    int prev_index = 0;
    for (;;) {
      while (p < end && std::isspace(static_cast<unsigned char>(*p))) ++p;
      if (p == end) break;
      int idx = 0;
      auto [next, ec] = std::from_chars(p, end, idx);
      if (ec != std::errc() || next == end || *next != ':')
        parse_fail(path, line_no, "malformed feature token");
      if (idx < 1) parse_fail(path, line_no, "feature index must be >= 1");
      if (idx <= prev_index) parse_fail(path, line_no, "feature indices must be increasing");
      prev_index = idx;
      p = next + 1;
      const double v = parse_double(p, end, path, line_no);
      triplets.push_back({row, idx - 1, v});
      max_index = std::max(max_index, idx);
    }
  }
  require(!labels.empty(), path + ": no samples");

  Dataset data;
  data.points = RowMatrix::Zero(labels.size(), max_index);
  data.targets.resize(labels.size());
  for (size_t i = 0; i < labels.size(); ++i) data.targets[i] = labels[i];
  for (const Triplet& t : triplets) data.points(t.row, t.col) = t.value;
  return data;
}

void write_libsvm(const Dataset& data, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  require(f != nullptr, "cannot write " + path);
  for (int i = 0; i < data.n(); ++i) {
    std::fprintf(f, "%.17g", data.targets[i]);
    for (int k = 0; k < data.d(); ++k)
      if (data.points(i, k) != 0.0) std::fprintf(f, " %d:%.17g", k + 1, data.points(i, k));
    std::fputc('\n', f);
  }
  std::fclose(f);
}

void reconcile_dims(Dataset& a, Dataset& b) {
  const int d = std::max(a.d(), b.d());
  for (Dataset* ds : {&a, &b}) {
    if (ds->d() == d) continue;
    RowMatrix grown = RowMatrix::Zero(ds->n(), d);
    grown.leftCols(ds->d()) = ds->points;
    ds->points = std::move(grown);
  }
}

NormStats preprocess(Dataset& train, Dataset* test, bool normalize) {
  if (test != nullptr)
    require(train.d() == test->d(), "preprocess: dimension mismatch between train and test");

  // duplicate removal is identity-by-coordinates: equal rows with one label
  // collapse, equal rows with conflicting labels all go
  struct RowKey {
    const RowMatrix* pts;
    int row;
  };
  struct KeyHash {
    size_t operator()(const RowKey& k) const {
      size_t h = 1469598103934665603ULL;
      for (int c = 0; c < k.pts->cols(); ++c) {
        double v = (*k.pts)(k.row, c);
        if (v == 0.0) v = 0.0;  // normalize -0.0
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof bits);
        h = (h ^ bits) * 1099511628211ULL;
      }
      return h;
    }
  };
  struct KeyEq {
    bool operator()(const RowKey& a, const RowKey& b) const {
      return a.pts->row(a.row) == b.pts->row(b.row);
    }
  };

  std::unordered_map<RowKey, int, KeyHash, KeyEq> first_seen;
  std::vector<char> drop(train.n(), 0);
  for (int i = 0; i < train.n(); ++i) {
    auto [it, inserted] = first_seen.try_emplace(RowKey{&train.points, i}, i);
    if (inserted) continue;
    const int j = it->second;
    if (train.targets[i] == train.targets[j]) {
      drop[i] = 1;  // exact duplicate
    } else {
      drop[i] = 1;  // conflicting records: remove every occurrence
      drop[j] = 1;
    }
  }
  int kept = 0;
  for (int i = 0; i < train.n(); ++i) kept += !drop[i];
  if (kept != train.n()) {
    RowMatrix pts(kept, train.d());
    VectorXd tg(kept);
    int w = 0;
    for (int i = 0; i < train.n(); ++i) {
      if (drop[i]) continue;
      pts.row(w) = train.points.row(i);
      tg[w] = train.targets[i];
      ++w;
    }
    train.points = std::move(pts);
    train.targets = std::move(tg);
  }

  NormStats stats;
  stats.enabled = normalize;
  if (normalize) {
    require(train.n() >= 1, "preprocess: empty training set after dedup");
    stats.min = train.points.colwise().minCoeff().transpose();
    stats.max = train.points.colwise().maxCoeff().transpose();
    apply_normalization(stats, train.points);
    if (test != nullptr) apply_normalization(stats, test->points);
  }
  return stats;
}

void apply_normalization(const NormStats& stats, RowMatrix& pts) {
  if (!stats.enabled) return;
  require(pts.cols() == stats.min.size(), "apply_normalization: dimension mismatch");
  for (int c = 0; c < pts.cols(); ++c) {
    const double lo = stats.min[c], hi = stats.max[c];
    if (hi == lo) {
      pts.col(c).setZero();
    } else {
      pts.col(c) = (2.0 * (pts.col(c).array() - lo) / (hi - lo) - 1.0).matrix();
    }
  }
}

}  // namespace hck
