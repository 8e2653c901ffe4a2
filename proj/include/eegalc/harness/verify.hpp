#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "eegalc/cnn/gradcheck.hpp"
#include "eegalc/cnn/train.hpp"
#include "eegalc/dsp/bands.hpp"
#include "eegalc/dsp/fft.hpp"
#include "eegalc/dsp/morlet.hpp"
#include "eegalc/dsp/pca.hpp"
#include "eegalc/features/correlation.hpp"
#include "eegalc/rng.hpp"

namespace eegalc::harness {

struct VerifyCheck {
  std::string name;
  bool passed = false;
  double measured = 0.0;
  double threshold = 0.0;
  double seconds = 0.0;
  std::string detail;
};

struct VerifyOptions {
  std::uint64_t seed = 0;
  bool fault_fft_sign_flip = false;  // corrupts the fast transform to prove the oracle bites
  bool include_cnn = true;
  std::size_t gradcheck_samples_per_layer = 200;
};

namespace detail {

/// X(k) = sum_n x(n) exp(-2 pi j k n / N), summed directly.
inline std::vector<Complex> naive_dft(const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<Complex> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    Complex acc = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      const double ang = -2.0 * std::numbers::pi * static_cast<double>((k * t) % n) / static_cast<double>(n);
      acc += x[t] * Complex(std::cos(ang), std::sin(ang));
    }
    out[k] = acc;
  }
  return out;
}

inline std::vector<double> random_signal(Rng& rng, std::size_t n) {
  std::vector<double> x(n);
  for (auto& v : x) v = normal(rng);
  return x;
}

inline Trial random_trial(Rng& rng) {
  Trial t;
  t.data = MatrixD(kChannels, kSamples);
  for (auto& v : t.data.data()) v = normal(rng);
  return t;
}

template <class F>
VerifyCheck timed(const std::string& name, F&& body) {
  VerifyCheck c;
  c.name = name;
  const auto t0 = std::chrono::steady_clock::now();
  body(c);
  c.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return c;
}

}  // namespace detail

inline VerifyCheck check_fft_oracle(const VerifyOptions& o) {
  return detail::timed("fft_vs_naive_dft", [&](VerifyCheck& c) {
    Rng rng(derive_seed(o.seed, 1));
    double err = 0.0;
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<std::vector<Complex>> fast;
    std::vector<std::vector<double>> inputs;
    for (int trial = 0; trial < 100; ++trial) {
      inputs.push_back(detail::random_signal(rng, 256));
      auto X = fft(std::span<const double>(inputs.back()));
      if (o.fault_fft_sign_flip) {
        for (auto& v : X) v = std::conj(v);  // exp(+j...) kernel
      }
      fast.push_back(std::move(X));
    }
    const double fast_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      const auto ref = detail::naive_dft(inputs[i]);
      for (std::size_t k = 0; k < ref.size(); ++k) err = std::max(err, std::abs(fast[i][k] - ref[k]));
    }
    c.measured = err;
    c.threshold = 1e-9;
    c.passed = err < 1e-9 && fast_seconds < 1.0;
    char buf[96];
    std::snprintf(buf, sizeof buf, "100 inputs, N=256, fast transforms took %.4f s", fast_seconds);
    c.detail = buf;
  });
}

inline VerifyCheck check_parseval(const VerifyOptions& o) {
  return detail::timed("parseval_and_roundtrip", [&](VerifyCheck& c) {
    Rng rng(derive_seed(o.seed, 1));
    double err = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      const auto x = detail::random_signal(rng, 256);
      const auto s = dft(std::span<const double>(x), 256.0);
      double et = 0.0, ef = 0.0;
      for (double v : x) et += v * v;
      for (const auto& b : s.bins) ef += std::norm(b);
      err = std::max(err, std::abs(et - ef / static_cast<double>(x.size())));
      const auto back = idft(s);
      for (std::size_t i = 0; i < x.size(); ++i) err = std::max(err, std::abs(back[i] - Complex(x[i], 0.0)));
    }
    c.measured = err;
    c.threshold = 1e-9;
    c.passed = err < 1e-9;
    c.detail = "energy difference and idft(dft(x)) - x, max abs";
  });
}

inline VerifyCheck check_band_partition(const VerifyOptions& o) {
  return detail::timed("band_partition", [&](VerifyCheck& c) {
    Rng rng(derive_seed(o.seed, 3));
    double err = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      const auto x = detail::random_signal(rng, 256);
      const auto d = band_decompose(x, 256.0, BandMethod::fft_mask);
      for (std::size_t i = 0; i < x.size(); ++i) {
        double sum = d.residual[i];
        for (const auto& b : d.bands) sum += b[i];
        err = std::max(err, std::abs(sum - x[i]));
      }
    }
    std::vector<double> tone(256);
    for (std::size_t i = 0; i < tone.size(); ++i) tone[i] = std::sin(2.0 * std::numbers::pi * 10.0 * static_cast<double>(i) / 256.0);
    const auto d = band_decompose(tone, 256.0, BandMethod::fft_mask);
    double total = 0.0, alpha = 0.0;
    for (double v : tone) total += v * v;
    for (double v : d[Band::alpha]) alpha += v * v;
    const double share = alpha / total;
    c.measured = err;
    c.threshold = 1e-9;
    c.passed = err < 1e-9 && share >= 0.99;
    char buf[96];
    std::snprintf(buf, sizeof buf, "reconstruction max abs error; 10 Hz tone alpha energy share %.6f", share);
    c.detail = buf;
  });
}

/// Atoms are placed only where they fit inside the window (3 envelope widths
/// on each side), so truncation cannot move the peak.
inline VerifyCheck check_cwt_peak(const VerifyOptions& o) {
  return detail::timed("cwt_peak_localisation", [&](VerifyCheck& c) {
    Rng rng(derive_seed(o.seed, 4));
    const MorletParams p;
    const double fs = 256.0;
    const auto scales = log_scale_grid(p);
    const auto shifts = sample_times(256, fs);
    const double span = shifts.back();
    std::vector<std::size_t> usable;
    for (std::size_t i = 0; i < scales.size(); ++i) {
      if (6.0 * p.sigma * scales[i] <= span / 2.0) usable.push_back(i);
    }
    std::size_t hits = 0;
    for (int trial = 0; trial < 20; ++trial) {
      const std::size_t si = usable[uniform_index(rng, usable.size())];
      const double half = 3.0 * p.sigma * scales[si];
      std::vector<std::size_t> ok;
      for (std::size_t ti = 0; ti < shifts.size(); ++ti) {
        if (shifts[ti] >= half && shifts[ti] <= span - half) ok.push_back(ti);
      }
      const std::size_t ti = ok[uniform_index(rng, ok.size())];
      const auto atom = daughter_samples(p, {shifts[ti], scales[si]}, shifts);
      std::vector<double> x(atom.size());
      for (std::size_t i = 0; i < x.size(); ++i) x[i] = atom[i].real();
      const auto r = cwt(x, fs, p, scales, shifts);
      std::size_t best_s = 0, best_t = 0;
      double best = -1.0;
      for (std::size_t a = 0; a < scales.size(); ++a) {
        for (std::size_t t = 0; t < shifts.size(); ++t) {
          const double m = std::abs(r.coefficients(a, t));
          if (m > best) best = m, best_s = a, best_t = t;
        }
      }
      hits += (best_s == si && best_t == ti);
    }
    c.measured = static_cast<double>(hits);
    c.threshold = 20.0;
    c.passed = hits == 20;
    c.detail = std::to_string(hits) + "/20 atoms recovered at their grid cell";
  });
}

inline VerifyCheck check_correlation_psd(const VerifyOptions& o) {
  return detail::timed("correlation_psd", [&](VerifyCheck& c) {
    Rng rng(derive_seed(o.seed, 5));
    bool symmetric = true;
    double diag = 0.0, min_eig = std::numeric_limits<double>::infinity();
    for (int trial = 0; trial < 100; ++trial) {
      const auto t = detail::random_trial(rng);
      const auto m = pearson_rows(t.data);
      Eigen::MatrixXd e(kChannels, kChannels);
      for (std::size_t i = 0; i < kChannels; ++i) {
        diag = std::max(diag, std::abs(m(i, i) - 1.0));
        for (std::size_t j = 0; j < kChannels; ++j) {
          symmetric = symmetric && m(i, j) == m(j, i);
          e(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m(i, j);
        }
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(e, Eigen::EigenvaluesOnly);
      min_eig = std::min(min_eig, es.eigenvalues().minCoeff());
    }
    c.measured = min_eig;
    c.threshold = -1e-9;
    c.passed = symmetric && diag <= 1e-12 && min_eig >= -1e-9;
    char buf[128];
    std::snprintf(buf, sizeof buf, "min eigenvalue; symmetric=%s, max |diag-1|=%.3g", symmetric ? "yes" : "no", diag);
    c.detail = buf;
  });
}

/// Synthetic blink: a 200 uV, 40 ms-sigma Gaussian bump on the frontal
/// electrodes over 5 uV background noise.
inline Trial blink_trial(Rng& rng, Trial* background = nullptr) {
  Trial t;
  t.data = MatrixD(kChannels, kSamples);
  for (auto& v : t.data.data()) v = 5.0 * normal(rng);
  if (background) *background = t;
  const auto& map = ElectrodeMap::standard();
  const FrontalLoading frontal;
  for (const auto& name : frontal.electrodes) {
    const auto c = map.index_or_throw(name) - 1;
    const double w = 0.8 + 0.2 * uniform01(rng);
    for (std::size_t s = 0; s < kSamples; ++s) {
      const double dt = (static_cast<double>(s) - 128.0) / 256.0;
      t.data(c, s) += w * 200.0 * std::exp(-dt * dt / (2.0 * 0.04 * 0.04));
    }
  }
  return t;
}

inline VerifyCheck check_pca(const VerifyOptions& o) {
  return detail::timed("pca_orthonormality_and_blink", [&](VerifyCheck& c) {
    Rng rng(derive_seed(o.seed, 6));
    double ortho = 0.0, recon = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
      const auto t = detail::random_trial(rng);
      const auto m = pca_fit(t);
      const std::size_t d = m.dim();
      for (std::size_t a = 0; a < d; ++a) {
        for (std::size_t b = 0; b < d; ++b) {
          double dot = 0.0;
          for (std::size_t k = 0; k < d; ++k) dot += m.components(a, k) * m.components(b, k);
          ortho = std::max(ortho, std::abs(dot - (a == b ? 1.0 : 0.0)));
        }
      }
      // Scores on every component mapped back must reproduce the data.
      for (std::size_t s = 0; s < t.data.cols(); ++s) {
        std::vector<double> back(m.mean);
        for (std::size_t r = 0; r < d; ++r) {
          double score = 0.0;
          for (std::size_t k = 0; k < d; ++k) score += (t.data(k, s) - m.mean[k]) * m.components(r, k);
          for (std::size_t k = 0; k < d; ++k) back[k] += score * m.components(r, k);
        }
        for (std::size_t k = 0; k < d; ++k) recon = std::max(recon, std::abs(back[k] - t.data(k, s)));
      }
    }
    double worst_ratio = std::numeric_limits<double>::infinity();
    for (int trial = 0; trial < 10; ++trial) {
      Trial bg;
      const auto t = blink_trial(rng, &bg);
      // Removal is linear in the data, so the blink's trace in the output is
      // clean(contaminated) - clean(background) under the same fitted model.
      const auto model = pca_fit(t);
      const auto cleaned = remove_artifacts(t, model, FrontalLoading{});
      const auto cleaned_bg = remove_artifacts(bg, model, FrontalLoading{});
      double before = 0.0, after = 0.0;
      for (const auto& name : FrontalLoading{}.electrodes) {
        const auto ch = ElectrodeMap::standard().index_or_throw(name) - 1;
        for (std::size_t s = 0; s < kSamples; ++s) {
          before = std::max(before, std::abs(t.data(ch, s) - bg.data(ch, s)));
          after = std::max(after, std::abs(cleaned.data(ch, s) - cleaned_bg.data(ch, s)));
        }
      }
      worst_ratio = std::min(worst_ratio, before / after);
    }
    c.measured = worst_ratio;
    c.threshold = 10.0;
    c.passed = ortho <= 1e-9 && recon <= 1e-9 && worst_ratio >= 10.0;
    char buf[160];
    std::snprintf(buf, sizeof buf, "blink peak reduction (worst of 10); orthonormality %.3g, reconstruction %.3g",
                  ortho, recon);
    c.detail = buf;
  });
}

inline VerifyCheck check_cnn_gradient(const VerifyOptions& o) {
  return detail::timed("cnn_gradcheck", [&](VerifyCheck& c) {
    Rng rng(derive_seed(o.seed, 7));
    auto m = cnn::build_default({1, 64, 64}, derive_seed(o.seed, 8));
    cnn::Tensor batch(2, {1, 64, 64});
    for (auto& v : batch.data) v = normal(rng);
    const std::vector<int> labels{0, 1};
    const auto masks = m.draw_masks(2, rng);
    cnn::GradCheckOptions g;
    g.epsilon = 1e-5;
    g.samples_per_layer = o.gradcheck_samples_per_layer;
    g.seed = derive_seed(o.seed, 9);
    const auto rep = cnn::grad_check(m, batch, labels, masks, g);
    double worst = 0.0;
    std::string per;
    for (const auto& e : rep) {
      worst = std::max(worst, e.max_rel_error);
      char buf[96];
      std::snprintf(buf, sizeof buf, "%s%s@%zu=%.2e", per.empty() ? "" : ", ",
                    std::string(cnn::to_string(e.kind)).c_str(), e.layer_index, e.max_rel_error);
      per += buf;
    }
    c.measured = worst;
    c.threshold = 1e-4;
    c.detail = per;
    c.passed = worst < 1e-4;
  });
}

inline VerifyCheck check_overfit(const VerifyOptions& o) {
  return detail::timed("cnn_overfit_drill", [&](VerifyCheck& c) {
    Rng rng(derive_seed(o.seed, 10));
    cnn::Dataset d;
    d.x = cnn::Tensor(16, {1, 64, 64});
    for (auto& v : d.x.data) v = normal(rng);
    for (int i = 0; i < 16; ++i) d.y.push_back(i % 2);
    cnn::TrainConfig tc;
    tc.epochs = 500;
    tc.batch_size = 16;
    tc.seed = derive_seed(o.seed, 11);
    const auto res = cnn::train(cnn::build_default({1, 64, 64}, derive_seed(o.seed, 12)), d, d, tc);
    auto model = res.model;
    const double acc = cnn::accuracy(model, d);
    c.measured = acc;
    c.threshold = 1.0;
    c.passed = acc == 1.0;
    c.detail = "train accuracy after " + std::to_string(res.history.epochs.size()) + " epochs";
  });
}

inline std::vector<VerifyCheck> run_verify(const VerifyOptions& o = {},
                                           const std::function<void(const VerifyCheck&)>& on_check = {}) {
  std::vector<VerifyCheck> out;
  auto add = [&](VerifyCheck c) {
    if (on_check) on_check(c);
    out.push_back(std::move(c));
  };
  add(check_fft_oracle(o));
  add(check_parseval(o));
  add(check_band_partition(o));
  add(check_cwt_peak(o));
  add(check_correlation_psd(o));
  add(check_pca(o));
  if (o.include_cnn) {
    add(check_cnn_gradient(o));
    add(check_overfit(o));
  }
  return out;
}

inline std::string format_check(const VerifyCheck& c) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%s %-30s measured=%.4g threshold=%.4g (%.2fs) ", c.passed ? "PASS" : "FAIL",
                c.name.c_str(), c.measured, c.threshold, c.seconds);
  return buf + c.detail;
}

inline nlohmann::json to_json(const VerifyCheck& c) {
  return {{"name", c.name}, {"passed", c.passed}, {"measured", c.measured}, {"threshold", c.threshold},
          {"seconds", c.seconds}, {"detail", c.detail}};
}

}  // namespace eegalc::harness
