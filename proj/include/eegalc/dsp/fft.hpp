#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include "eegalc/error.hpp"

namespace eegalc {

using Complex = std::complex<double>;

/// F(k) for k = 0..n-1 with bin spacing delta_f = fs / n.
struct Spectrum {
  std::vector<Complex> bins;
  double fs = 0.0;
  std::size_t n = 0;
  double delta_f = 0.0;

  double frequency(std::size_t k) const { return static_cast<double>(k) * delta_f; }
};

constexpr bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

namespace detail {

/// In-place iterative radix-2 Cooley-Tukey, forward sign convention e^{-2 pi j kn/N}.
inline void fft_radix2(std::vector<Complex>& a) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = -2.0 * std::numbers::pi / static_cast<double>(len);
    const std::size_t half = len / 2;
    // Twiddles computed directly per index; a running product drifts by ~1e-13 at N=256.
    std::vector<Complex> w(half);
    for (std::size_t k = 0; k < half; ++k) {
      w[k] = std::polar(1.0, ang * static_cast<double>(k));
    }
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t k = 0; k < half; ++k) {
        const Complex u = a[i + k];
        const Complex v = a[i + k + half] * w[k];
        a[i + k] = u + v;
        a[i + k + half] = u - v;
      }
    }
  }
}

inline std::vector<Complex> dft_direct(std::span<const Complex> x) {
  const std::size_t n = x.size();
  std::vector<Complex> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    Complex acc = 0.0;
    for (std::size_t m = 0; m < n; ++m) {
      const auto idx = (k * m) % n;
      acc += x[m] * std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(idx) /
                                        static_cast<double>(n));
    }
    out[k] = acc;
  }
  return out;
}

}  // namespace detail

/// Power-of-two lengths take the radix-2 path; others are summed directly.
inline std::vector<Complex> fft(std::span<const Complex> x) {
  if (x.empty()) fail(ErrorCode::EmptyInput, "dft of empty sequence");
  if (!is_power_of_two(x.size())) return detail::dft_direct(x);
  std::vector<Complex> a(x.begin(), x.end());
  detail::fft_radix2(a);
  return a;
}

inline std::vector<Complex> fft(std::span<const double> x) {
  std::vector<Complex> c(x.begin(), x.end());
  return fft(std::span<const Complex>(c));
}

/// Inverse via conjugation: conj(fft(conj(F))) / N.
inline std::vector<Complex> ifft(std::span<const Complex> bins) {
  std::vector<Complex> c(bins.size());
  for (std::size_t i = 0; i < bins.size(); ++i) c[i] = std::conj(bins[i]);
  auto out = fft(std::span<const Complex>(c));
  const double inv = 1.0 / static_cast<double>(bins.size());
  for (auto& v : out) v = std::conj(v) * inv;
  return out;
}

inline Spectrum dft(std::span<const Complex> x, double fs) {
  if (!(fs > 0.0)) fail(ErrorCode::InvalidArgument, "sample rate must be positive");
  Spectrum s;
  s.bins = fft(x);
  s.fs = fs;
  s.n = x.size();
  s.delta_f = fs / static_cast<double>(s.n);
  return s;
}

inline Spectrum dft(std::span<const double> x, double fs) {
  std::vector<Complex> c(x.begin(), x.end());
  return dft(std::span<const Complex>(c), fs);
}

inline std::vector<Complex> idft(const Spectrum& s) { return ifft(s.bins); }

/// |F(k)| for k = 0..N/2 of a real input.
inline std::vector<double> one_sided_magnitude(std::span<const double> x) {
  const auto bins = fft(x);
  std::vector<double> mag(x.size() / 2 + 1);
  for (std::size_t k = 0; k < mag.size(); ++k) mag[k] = std::abs(bins[k]);
  return mag;
}

}  // namespace eegalc
