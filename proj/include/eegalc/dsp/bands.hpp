#pragma once

#include <array>
#include <cmath>
#include <span>
#include <string_view>
#include <vector>

#include "eegalc/dsp/fft.hpp"
#include "eegalc/dsp/swt.hpp"
#include "eegalc/error.hpp"

namespace eegalc {

enum class Band { delta = 0, theta = 1, alpha = 2, beta = 3 };
inline constexpr std::array<Band, 4> kBands = {Band::delta, Band::theta, Band::alpha, Band::beta};

constexpr std::string_view to_string(Band b) {
  switch (b) {
    case Band::delta: return "delta";
    case Band::theta: return "theta";
    case Band::alpha: return "alpha";
    case Band::beta: return "beta";
  }
  return "?";
}

struct BandEdges {
  double lo;
  double hi;
};

/// Half-open [lo, hi) in Hz. Beta stops at 20 Hz.
constexpr BandEdges band_edges(Band b) {
  switch (b) {
    case Band::delta: return {0.0, 4.0};
    case Band::theta: return {4.0, 8.0};
    case Band::alpha: return {8.0, 12.0};
    case Band::beta: return {12.0, 20.0};
  }
  return {0.0, 0.0};
}

enum class BandMethod { fft_mask, swt_dyadic };

constexpr std::string_view to_string(BandMethod m) {
  return m == BandMethod::fft_mask ? "fft_mask" : "swt_dyadic";
}

inline BandMethod parse_band_method(std::string_view s) {
  if (s == "fft_mask") return BandMethod::fft_mask;
  if (s == "swt_dyadic") return BandMethod::swt_dyadic;
  fail(ErrorCode::InvalidArgument, "unknown band method '" + std::string(s) + "'");
}

struct BandDecomposition {
  std::array<std::vector<double>, 4> bands;
  std::vector<double> residual;
  BandMethod method = BandMethod::fft_mask;

  const std::vector<double>& operator[](Band b) const { return bands[static_cast<int>(b)]; }
};

/// Absolute frequency of bin k, folding the upper half onto negative frequencies.
inline double bin_frequency(std::size_t k, std::size_t n, double fs) {
  const std::size_t folded = k <= n / 2 ? k : n - k;
  return static_cast<double>(folded) * fs / static_cast<double>(n);
}

namespace detail {

inline BandDecomposition decompose_fft_mask(std::span<const double> x, double fs) {
  const std::size_t n = x.size();
  const auto spectrum = fft(x);
  BandDecomposition out;
  out.method = BandMethod::fft_mask;
  out.residual.assign(x.begin(), x.end());
  for (Band b : kBands) {
    const auto [lo, hi] = band_edges(b);
    std::vector<Complex> masked(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
      const double f = bin_frequency(k, n, fs);
      if (f >= lo && f < hi) masked[k] = spectrum[k];
    }
    const auto time = ifft(masked);
    auto& comp = out.bands[static_cast<int>(b)];
    comp.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      comp[i] = time[i].real();
      out.residual[i] -= comp[i];
    }
  }
  return out;
}

inline std::vector<double> reconstruct_levels(const SwtCoefficients& c,
                                              std::initializer_list<std::size_t> keep_details,
                                              bool keep_approx) {
  SwtCoefficients z;
  z.approx.assign(c.approx.size(), 0.0);
  if (keep_approx) z.approx = c.approx;
  for (std::size_t j = 0; j < c.details.size(); ++j) {
    z.details.emplace_back(c.details[j].size(), 0.0);
  }
  for (auto level : keep_details) z.details[level - 1] = c.details[level - 1];
  return iswt(z);
}

inline BandDecomposition decompose_swt(std::span<const double> x, double fs) {
  if (fs != 256.0) fail(ErrorCode::UnsupportedRate, "swt_dyadic requires fs = 256 Hz");
  if (!is_power_of_two(x.size())) fail(ErrorCode::LengthNotPowerOfTwo, "swt_dyadic input length");
  const auto c = swt(x, 6);
  BandDecomposition out;
  out.method = BandMethod::swt_dyadic;
  // Level j covers fs/2^(j+1) .. fs/2^j: D3 16-32, D4 8-16, D5 4-8, D6+A6 0-4 Hz.
  out.bands[static_cast<int>(Band::delta)] = reconstruct_levels(c, {6}, true);
  out.bands[static_cast<int>(Band::theta)] = reconstruct_levels(c, {5}, false);
  out.bands[static_cast<int>(Band::alpha)] = reconstruct_levels(c, {4}, false);
  out.bands[static_cast<int>(Band::beta)] = reconstruct_levels(c, {3}, false);
  out.residual = reconstruct_levels(c, {1, 2}, false);
  return out;
}

}  // namespace detail

inline BandDecomposition band_decompose(std::span<const double> x, double fs,
                                        BandMethod method = BandMethod::fft_mask) {
  if (x.empty()) fail(ErrorCode::EmptyInput, "band_decompose of empty signal");
  if (!(fs > 0.0)) fail(ErrorCode::InvalidArgument, "sample rate must be positive");
  return method == BandMethod::fft_mask ? detail::decompose_fft_mask(x, fs)
                                        : detail::decompose_swt(x, fs);
}

}  // namespace eegalc
