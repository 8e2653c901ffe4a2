#pragma once

#include <cstdio>
#include <string>

#include "eegalc/dsp/bands.hpp"
#include "eegalc/dsp/fft.hpp"

namespace eegalc {

/// Columns: time_s, delta, theta, alpha, beta, residual.
inline std::string bands_to_csv(const BandDecomposition& d, double fs) {
  std::string out = "time_s,delta,theta,alpha,beta,residual\n";
  char buf[256];
  for (std::size_t i = 0; i < d.residual.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.6f,%.9g,%.9g,%.9g,%.9g,%.9g\n", static_cast<double>(i) / fs,
                  d.bands[0][i], d.bands[1][i], d.bands[2][i], d.bands[3][i], d.residual[i]);
    out += buf;
  }
  return out;
}

/// Columns: bin, frequency_hz, re, im, magnitude.
inline std::string spectrum_to_csv(const Spectrum& s) {
  std::string out = "bin,frequency_hz,re,im,magnitude\n";
  char buf[256];
  for (std::size_t k = 0; k < s.bins.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%zu,%.6f,%.9g,%.9g,%.9g\n", k, s.frequency(k), s.bins[k].real(),
                  s.bins[k].imag(), std::abs(s.bins[k]));
    out += buf;
  }
  return out;
}

}  // namespace eegalc
