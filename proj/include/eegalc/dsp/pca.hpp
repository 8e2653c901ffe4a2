#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "eegalc/error.hpp"
#include "eegalc/ingest/electrode_map.hpp"
#include "eegalc/ingest/trial.hpp"
#include "eegalc/matrix.hpp"

namespace eegalc {

/// Rows of `components` are unit principal directions, ordered by
/// descending explained variance.
struct PcaModel {
  std::vector<double> mean;
  MatrixD components;
  std::vector<double> explained_variance;

  std::size_t dim() const { return mean.size(); }
};

/// Covariance eigendecomposition of mean-centred observations (rows of X).
inline PcaModel pca_fit(const MatrixD& X) {
  if (X.rows() < 2) fail(ErrorCode::DegenerateInput, "pca_fit needs at least 2 observations");
  const std::size_t n = X.rows();
  const std::size_t d = X.cols();
  for (double v : X.data()) {
    if (!std::isfinite(v)) fail(ErrorCode::NonFiniteValue, "pca_fit input");
  }
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> xm(
      X.data().data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  const Eigen::RowVectorXd mu = xm.colwise().mean();
  const Eigen::MatrixXd centred = xm.rowwise() - mu;
  const Eigen::MatrixXd cov = (centred.transpose() * centred) / static_cast<double>(n - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success) fail(ErrorCode::DegenerateInput, "eigendecomposition failed");

  PcaModel m;
  m.mean.assign(mu.data(), mu.data() + d);
  m.components = MatrixD(d, d);
  m.explained_variance.resize(d);
  // Eigen returns ascending eigenvalues.
  for (std::size_t r = 0; r < d; ++r) {
    const auto src = static_cast<Eigen::Index>(d - 1 - r);
    m.explained_variance[r] = std::max(0.0, eig.eigenvalues()(src));
    Eigen::VectorXd v = eig.eigenvectors().col(src);
    // Sign convention: largest-magnitude loading positive.
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0) v = -v;
    for (std::size_t c = 0; c < d; ++c) m.components(r, c) = v(static_cast<Eigen::Index>(c));
  }
  return m;
}

/// Per-trial fit: each of the 256 time samples is one 64-dimensional observation.
inline PcaModel pca_fit(const Trial& t) {
  MatrixD obs(t.data.cols(), t.data.rows());
  for (std::size_t c = 0; c < t.data.rows(); ++c) {
    for (std::size_t s = 0; s < t.data.cols(); ++s) obs(s, c) = t.data(c, s);
  }
  return pca_fit(obs);
}

struct DropTopK {
  int k = 1;
};

/// Removes components whose squared loadings on `electrodes` sum to at least
/// `threshold` (loadings are unit vectors, so this is a fraction in [0,1]).
struct FrontalLoading {
  double threshold = 0.5;
  std::vector<std::string> electrodes = {"FP1", "FP2", "AF1", "AF2", "AF7", "AF8", "AFZ", "FPZ"};
};

using RemovalPolicy = std::variant<DropTopK, FrontalLoading>;

inline std::vector<std::size_t> select_components(const PcaModel& m, const RemovalPolicy& policy,
                                                  const ElectrodeMap& map = ElectrodeMap::standard()) {
  std::vector<std::size_t> out;
  if (const auto* top = std::get_if<DropTopK>(&policy)) {
    if (top->k < 0 || static_cast<std::size_t>(top->k) > m.dim()) {
      fail(ErrorCode::InvalidK, "k = " + std::to_string(top->k));
    }
    for (int i = 0; i < top->k; ++i) out.push_back(static_cast<std::size_t>(i));
    return out;
  }
  const auto& fl = std::get<FrontalLoading>(policy);
  std::set<std::size_t> cols;
  for (const auto& name : fl.electrodes) cols.insert(map.index_or_throw(name) - 1);
  for (std::size_t r = 0; r < m.components.rows(); ++r) {
    double load = 0.0;
    for (auto c : cols) load += m.components(r, c) * m.components(r, c);
    if (load >= fl.threshold) out.push_back(r);
  }
  return out;
}

/// Projects the selected components out of every time sample.
inline Trial remove_artifacts(const Trial& t, const PcaModel& m, const RemovalPolicy& policy) {
  if (m.dim() != t.data.rows()) fail(ErrorCode::DimensionMismatch, "PCA model dimension");
  const auto removed = select_components(m, policy);
  Trial out = t;
  if (removed.empty()) return out;
  const std::size_t d = m.dim();
  std::vector<double> centred(d);
  for (std::size_t s = 0; s < t.data.cols(); ++s) {
    for (std::size_t c = 0; c < d; ++c) centred[c] = t.data(c, s) - m.mean[c];
    for (auto r : removed) {
      double score = 0.0;
      for (std::size_t c = 0; c < d; ++c) score += centred[c] * m.components(r, c);
      for (std::size_t c = 0; c < d; ++c) out.data(c, s) -= score * m.components(r, c);
    }
  }
  return out;
}

}  // namespace eegalc
