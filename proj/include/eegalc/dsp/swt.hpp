#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "eegalc/dsp/fft.hpp"
#include "eegalc/error.hpp"

namespace eegalc {

/// Daubechies wavelet with 4 vanishing moments (8-tap), orthonormal
/// scaling filter: sum h = sqrt(2), sum h^2 = 1.
inline constexpr std::array<double, 8> kDb4Lowpass = {
    0.23037781330885523,  0.7148465705525415,   0.6308807679295904,   -0.02798376941698385,
    -0.18703481171888114, 0.030841381835986965, 0.032883011666982945, -0.010597401784997278};

inline std::array<double, 8> db4_highpass() {
  std::array<double, 8> g{};
  for (std::size_t k = 0; k < 8; ++k) {
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    g[k] = sign * kDb4Lowpass[7 - k];
  }
  return g;
}

/// Undecimated (a trous) periodic wavelet transform.
/// details[j] holds level j+1; approx is the final low-pass band.
struct SwtCoefficients {
  std::vector<std::vector<double>> details;
  std::vector<double> approx;
};

namespace detail {

/// y[n] = sum_k f[k] x[(n + stride*k) mod N]
inline std::vector<double> swt_analysis(std::span<const double> x, std::span<const double> f,
                                        std::size_t stride) {
  const std::size_t n = x.size();
  std::vector<double> y(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t k = 0; k < f.size(); ++k) acc += f[k] * x[(i + stride * k) % n];
    y[i] = acc;
  }
  return y;
}

/// Adjoint of swt_analysis: x[m] += sum_k f[k] y[(m - stride*k) mod N]
inline void swt_adjoint_add(std::span<const double> y, std::span<const double> f,
                            std::size_t stride, std::vector<double>& out) {
  const std::size_t n = y.size();
  for (std::size_t m = 0; m < n; ++m) {
    double acc = 0.0;
    for (std::size_t k = 0; k < f.size(); ++k) {
      const std::size_t shift = (stride * k) % n;
      acc += f[k] * y[(m + n - shift) % n];
    }
    out[m] += acc;
  }
}

}  // namespace detail

inline SwtCoefficients swt(std::span<const double> x, std::size_t levels) {
  if (!is_power_of_two(x.size())) fail(ErrorCode::LengthNotPowerOfTwo, "swt input length");
  if ((std::size_t{1} << levels) > x.size()) {
    fail(ErrorCode::InvalidArgument, "too many swt levels for input length");
  }
  const auto g = db4_highpass();
  SwtCoefficients c;
  std::vector<double> approx(x.begin(), x.end());
  for (std::size_t j = 0; j < levels; ++j) {
    const std::size_t stride = std::size_t{1} << j;
    c.details.push_back(detail::swt_analysis(approx, g, stride));
    approx = detail::swt_analysis(approx, kDb4Lowpass, stride);
  }
  c.approx = std::move(approx);
  return c;
}

/// Each analysis stage is a tight frame with bound 2, so half the adjoint inverts it.
inline std::vector<double> iswt(const SwtCoefficients& c) {
  const auto g = db4_highpass();
  std::vector<double> approx = c.approx;
  for (std::size_t j = c.details.size(); j-- > 0;) {
    const std::size_t stride = std::size_t{1} << j;
    std::vector<double> prev(approx.size(), 0.0);
    detail::swt_adjoint_add(approx, kDb4Lowpass, stride, prev);
    detail::swt_adjoint_add(c.details[j], g, stride, prev);
    for (auto& v : prev) v *= 0.5;
    approx = std::move(prev);
  }
  return approx;
}

}  // namespace eegalc
