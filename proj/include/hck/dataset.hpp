#pragma once

#include "hck/common.hpp"

#include <string>

namespace hck {

/// Labeled points. Files use 1-based sparse indices; memory is dense 0-based.
struct Dataset {
  RowMatrix points;
  VectorXd targets;

  int n() const { return static_cast<int>(points.rows()); }
  int d() const { return static_cast<int>(points.cols()); }
};

Dataset parse_libsvm(const std::string& path);
void write_libsvm(const Dataset& data, const std::string& path);

/// Per-attribute min-max scaling to [-1, 1], computed from training data.
struct NormStats {
  VectorXd min;
  VectorXd max;
  bool enabled = false;
};

/// Collapses exact-duplicate training rows, removes conflicting ones (same
/// coordinates, different labels), and optionally scales both sets with
/// training statistics. Values outside the training range extrapolate
/// linearly; constant attributes map to 0.
NormStats preprocess(Dataset& train, Dataset* test, bool normalize);

void apply_normalization(const NormStats& stats, RowMatrix& pts);

/// Pads both sets with zero columns to a common width.
void reconcile_dims(Dataset& a, Dataset& b);

}  // namespace hck
