#pragma once

#include <cmath>
#include <vector>

#include "eegalc/error.hpp"
#include "eegalc/features/tensor.hpp"
#include "eegalc/matrix.hpp"

namespace eegalc::ml {

/// Feature rows with binary labels (0 control, 1 alcoholic).
struct LabeledVectors {
  MatrixD x;
  std::vector<int> y;
  FeatureKind feature_kind = FeatureKind::raw;

  std::size_t size() const { return y.size(); }
  std::size_t dim() const { return x.cols(); }

  void validate() const {
    if (x.rows() != y.size()) fail(ErrorCode::DimensionMismatch, "x rows != y length");
    for (int label : y) {
      if (label != 0 && label != 1) fail(ErrorCode::InvalidArgument, "labels must be 0 or 1");
    }
    for (double v : x.data()) {
      if (!std::isfinite(v)) fail(ErrorCode::NonFiniteValue, "feature matrix");
    }
  }

  std::size_t count(int label) const {
    std::size_t n = 0;
    for (int v : y) n += (v == label);
    return n;
  }
};

inline LabeledVectors make_labeled(const std::vector<std::vector<double>>& rows,
                                   const std::vector<int>& labels,
                                   FeatureKind kind = FeatureKind::raw) {
  if (rows.size() != labels.size()) fail(ErrorCode::DimensionMismatch, "rows vs labels");
  LabeledVectors lv;
  lv.feature_kind = kind;
  const std::size_t d = rows.empty() ? 0 : rows.front().size();
  lv.x = MatrixD(rows.size(), d);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != d) fail(ErrorCode::DimensionMismatch, "ragged feature rows");
    std::copy(rows[i].begin(), rows[i].end(), lv.x.row(i).begin());
  }
  lv.y = labels;
  lv.validate();
  return lv;
}

/// Flattens feature tensors (see flatten()) into a labelled matrix.
inline LabeledVectors from_tensors(const std::vector<FeatureTensor>& tensors) {
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  rows.reserve(tensors.size());
  for (const auto& t : tensors) {
    rows.push_back(flatten(t));
    labels.push_back(static_cast<int>(t.label));
  }
  return make_labeled(rows, labels, tensors.empty() ? FeatureKind::raw : tensors.front().kind);
}

}  // namespace eegalc::ml
