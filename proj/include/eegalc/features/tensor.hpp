#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "eegalc/dsp/bands.hpp"
#include "eegalc/dsp/config.hpp"
#include "eegalc/dsp/fft.hpp"
#include "eegalc/error.hpp"
#include "eegalc/features/correlation.hpp"
#include "eegalc/ingest/trial.hpp"

namespace eegalc {

enum class FeatureKind : std::uint8_t {
  raw = 0,
  beta = 1,
  alpha = 2,
  theta = 3,
  delta = 4,
  correlation = 5,
  fft = 6,
};

/// Column order of the accuracy table.
inline constexpr std::array<FeatureKind, 7> kAllFeatureKinds = {
    FeatureKind::beta,        FeatureKind::alpha, FeatureKind::theta, FeatureKind::delta,
    FeatureKind::correlation, FeatureKind::fft,   FeatureKind::raw};

constexpr std::string_view to_string(FeatureKind k) {
  switch (k) {
    case FeatureKind::raw: return "raw";
    case FeatureKind::beta: return "beta";
    case FeatureKind::alpha: return "alpha";
    case FeatureKind::theta: return "theta";
    case FeatureKind::delta: return "delta";
    case FeatureKind::correlation: return "correlation";
    case FeatureKind::fft: return "fft";
  }
  return "?";
}

inline FeatureKind parse_feature_kind(std::string_view s) {
  for (auto k : kAllFeatureKinds) {
    if (to_string(k) == s) return k;
  }
  fail(ErrorCode::InvalidArgument, "unknown feature kind '" + std::string(s) + "'");
}

using TensorShape = std::array<std::uint32_t, 3>;  // (channels, height, width)

constexpr TensorShape feature_shape(FeatureKind k) {
  switch (k) {
    case FeatureKind::correlation: return {1, 64, 64};
    case FeatureKind::fft: return {1, 64, 129};
    default: return {1, 64, 256};
  }
}

struct FeatureTensor {
  FeatureKind kind = FeatureKind::raw;
  TensorShape shape{0, 0, 0};
  std::vector<double> data;
  Group label = Group::control;

  std::size_t size() const { return std::size_t{shape[0]} * shape[1] * shape[2]; }
  double at(std::size_t c, std::size_t h, std::size_t w) const {
    return data[(c * shape[1] + h) * shape[2] + w];
  }
};

/// z-score over all entries; constant input maps to all zeros.
inline void standardize(std::vector<double>& v) {
  if (v.empty()) return;
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double var = 0.0;
  bool constant = true;
  for (double x : v) {
    var += (x - mean) * (x - mean);
    if (x != v.front()) constant = false;
  }
  var /= static_cast<double>(v.size());
  if (constant || var == 0.0) {
    std::fill(v.begin(), v.end(), 0.0);
    return;
  }
  const double inv = 1.0 / std::sqrt(var);
  for (double& x : v) x = (x - mean) * inv;
}

inline std::optional<Band> band_of(FeatureKind k) {
  switch (k) {
    case FeatureKind::beta: return Band::beta;
    case FeatureKind::alpha: return Band::alpha;
    case FeatureKind::theta: return Band::theta;
    case FeatureKind::delta: return Band::delta;
    default: return std::nullopt;
  }
}

/// Unstandardised tensor payload for one kind.
inline std::vector<double> feature_payload(const Trial& t, FeatureKind kind, const DspConfig& cfg) {
  std::vector<double> out;
  const std::size_t ch = t.data.rows();
  const std::size_t n = t.data.cols();
  if (kind == FeatureKind::raw) return t.data.data();
  if (kind == FeatureKind::correlation) return pearson_rows(t.data).data();
  if (kind == FeatureKind::fft) {
    out.reserve(ch * (n / 2 + 1));
    for (std::size_t c = 0; c < ch; ++c) {
      const auto mag = one_sided_magnitude(t.data.row(c));
      out.insert(out.end(), mag.begin(), mag.end());
    }
    return out;
  }
  const Band band = *band_of(kind);
  out.reserve(ch * n);
  for (std::size_t c = 0; c < ch; ++c) {
    const auto d = band_decompose(t.data.row(c), t.sample_rate, cfg.band_method);
    const auto& comp = d[band];
    out.insert(out.end(), comp.begin(), comp.end());
  }
  return out;
}

inline FeatureTensor feature_tensor(const Trial& t, FeatureKind kind, const DspConfig& cfg = {}) {
  FeatureTensor ft;
  ft.kind = kind;
  ft.shape = feature_shape(kind);
  ft.label = t.group;
  ft.data = feature_payload(t, kind, cfg);
  if (ft.data.size() != ft.size()) fail(ErrorCode::ShapeMismatch, "feature payload size");
  standardize(ft.data);
  return ft;
}

/// Row-major flattening; the correlation kind keeps only the strict upper
/// triangle (64*63/2 = 2016 entries).
inline std::vector<double> flatten(const FeatureTensor& ft) {
  if (ft.kind != FeatureKind::correlation) return ft.data;
  const std::size_t n = ft.shape[1];
  std::vector<double> out;
  out.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) out.push_back(ft.at(0, i, j));
  }
  return out;
}

}  // namespace eegalc
