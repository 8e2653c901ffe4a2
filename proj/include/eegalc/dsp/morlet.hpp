#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <vector>

#include "eegalc/dsp/fft.hpp"
#include "eegalc/error.hpp"
#include "eegalc/matrix.hpp"

namespace eegalc {

/// Complex Morlet mother wavelet parameters: center angular frequency
/// omega0 (rad/s) and Gaussian envelope standard deviation sigma (s).
struct MorletParams {
  double omega0 = 6.0;
  double sigma = 1.0;

  void validate() const {
    if (!(omega0 > 0.0) || !(sigma > 0.0)) {
      fail(ErrorCode::InvalidArgument, "Morlet omega0 and sigma must be positive");
    }
  }
};

/// Daughter wavelet placement: time shift tau (s) and scale a.
struct WaveletAtom {
  double tau = 0.0;
  double a = 1.0;
};

/// psi(t) = (sigma^2 pi)^(-1/4) exp(-t^2 / (2 sigma^2)) exp(j omega0 t)
inline Complex morlet(double t, const MorletParams& p) {
  const double norm = std::pow(p.sigma * p.sigma * std::numbers::pi, -0.25);
  const double env = std::exp(-(t * t) / (2.0 * p.sigma * p.sigma));
  return norm * env * std::polar(1.0, p.omega0 * t);
}

/// psi_{tau,a}(t) = a^(-1/2) psi((t - tau) / a)
inline Complex daughter(double t, const MorletParams& p, const WaveletAtom& atom) {
  return morlet((t - atom.tau) / atom.a, p) / std::sqrt(atom.a);
}

inline std::vector<Complex> daughter_samples(const MorletParams& p, const WaveletAtom& atom,
                                             std::span<const double> grid) {
  if (!(atom.a > 0.0)) fail(ErrorCode::NonPositiveScale, "scale must be > 0");
  if (grid.size() >= 2) {
    const double step = grid[1] - grid[0];
    for (std::size_t i = 1; i < grid.size(); ++i) {
      const double d = grid[i] - grid[i - 1];
      if (!(d > 0.0) || std::abs(d - step) > 1e-9 * std::max(1.0, std::abs(step))) {
        fail(ErrorCode::InvalidArgument, "time grid must be strictly increasing and uniform");
      }
    }
  }
  std::vector<Complex> out(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) out[i] = daughter(grid[i], p, atom);
  return out;
}

/// Scale whose daughter oscillates at `hz`: omega0 / (2 pi a) = hz.
inline double scale_for_frequency(double hz, const MorletParams& p) {
  return p.omega0 / (2.0 * std::numbers::pi * hz);
}

inline double frequency_for_scale(double a, const MorletParams& p) {
  return p.omega0 / (2.0 * std::numbers::pi * a);
}

/// `count` scales, log-spaced in pseudo-frequency from lo_hz to hi_hz
/// (so scales descend).
inline std::vector<double> log_scale_grid(const MorletParams& p, double lo_hz = 1.0,
                                          double hi_hz = 64.0, std::size_t count = 32) {
  std::vector<double> scales(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double frac = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
    const double hz = lo_hz * std::pow(hi_hz / lo_hz, frac);
    scales[i] = scale_for_frequency(hz, p);
  }
  return scales;
}

inline std::vector<double> sample_times(std::size_t n, double fs) {
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i) t[i] = static_cast<double>(i) / fs;
  return t;
}

/// W(tau, a) over scales (rows) x shifts (columns).
struct CwtResult {
  Matrix<Complex> coefficients;
  std::vector<double> scale_grid;
  std::vector<double> shift_grid;
};

/// Riemann-sum discretisation of the wavelet inner product:
/// W(tau, a) = sum_n x(n/fs) conj(psi_{tau,a}(n/fs)) / fs.
inline CwtResult cwt(std::span<const double> x, double fs, const MorletParams& p,
                     std::span<const double> scales, std::span<const double> shifts) {
  p.validate();
  if (x.empty() || scales.empty() || shifts.empty()) fail(ErrorCode::EmptyGrid, "empty cwt grid");
  for (double a : scales) {
    if (!(a > 0.0)) fail(ErrorCode::NonPositiveScale, "scale must be > 0");
  }
  const double span_end = static_cast<double>(x.size() - 1) / fs;
  for (double tau : shifts) {
    if (tau < 0.0 || tau > span_end) fail(ErrorCode::InvalidArgument, "shift outside signal span");
  }
  for (double v : x) {
    if (!std::isfinite(v)) fail(ErrorCode::NonFiniteValue, "cwt input");
  }

  CwtResult r;
  r.coefficients = Matrix<Complex>(scales.size(), shifts.size());
  r.scale_grid.assign(scales.begin(), scales.end());
  r.shift_grid.assign(shifts.begin(), shifts.end());
  const double dt = 1.0 / fs;
  for (std::size_t si = 0; si < scales.size(); ++si) {
    const WaveletAtom base{0.0, scales[si]};
    for (std::size_t ti = 0; ti < shifts.size(); ++ti) {
      const WaveletAtom atom{shifts[ti], base.a};
      Complex acc = 0.0;
      for (std::size_t n = 0; n < x.size(); ++n) {
        acc += x[n] * std::conj(daughter(static_cast<double>(n) * dt, p, atom));
      }
      r.coefficients(si, ti) = acc * dt;
    }
  }
  return r;
}

/// Default grid: 32 log-spaced scales covering 1..64 Hz and every sample time as a shift.
inline CwtResult cwt(std::span<const double> x, double fs, const MorletParams& p = {}) {
  const auto scales = log_scale_grid(p);
  const auto shifts = sample_times(x.size(), fs);
  return cwt(x, fs, p, scales, shifts);
}

}  // namespace eegalc
