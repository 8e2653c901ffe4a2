#include <gtest/gtest.h>

#include <numbers>

#include "support.hpp"

using namespace eegalc;
using testing_support::error_code_of;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> random_real(Rng& rng, std::size_t n) {
  std::vector<double> x(n);
  for (auto& v : x) v = normal(rng);
  return x;
}

// Textbook O(N^2) summation, kept separate from the library's own direct path.
std::vector<Complex> naive_dft(const std::vector<Complex>& x) {
  const std::size_t n = x.size();
  std::vector<Complex> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    long double re = 0, im = 0;
    for (std::size_t j = 0; j < n; ++j) {
      const long double ang = -2.0L * std::numbers::pi_v<long double> *
                              static_cast<long double>((k * j) % n) / static_cast<long double>(n);
      re += x[j].real() * std::cos(ang) - x[j].imag() * std::sin(ang);
      im += x[j].real() * std::sin(ang) + x[j].imag() * std::cos(ang);
    }
    out[k] = {static_cast<double>(re), static_cast<double>(im)};
  }
  return out;
}

double energy(const std::vector<double>& x) {
  double e = 0;
  for (double v : x) e += v * v;
  return e;
}

std::size_t argmax_bin(const std::vector<Complex>& x) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < x.size() / 2; ++k) {
    if (std::abs(x[k]) > std::abs(x[best])) best = k;
  }
  return best;
}

}  // namespace

TEST(Morlet, OriginValue) {
  const Complex v = morlet(0.0, MorletParams{6.0, 1.0});
  EXPECT_NEAR(v.real(), 0.751126, 1e-6);
  EXPECT_EQ(v.imag(), 0.0);
}

TEST(Morlet, MagnitudeAtOneSecond) {
  const double m = std::abs(morlet(1.0, MorletParams{6.0, 1.0}));
  EXPECT_NEAR(m, std::exp(-0.5) * std::pow(kPi, -0.25), 1e-15);
  // 0.4555807 to seven places; the quoted 0.455582 is rounded one digit early.
  EXPECT_NEAR(m, 0.455582, 2e-6);
}

TEST(Morlet, EvenEnvelope) {
  Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    const double t = uniform(rng, -5, 5);
    const MorletParams p{uniform(rng, 1, 10), uniform(rng, 0.2, 3)};
    EXPECT_NEAR(std::abs(morlet(t, p)), std::abs(morlet(-t, p)), 1e-15);
  }
}

TEST(Morlet, InvalidParams) {
  EXPECT_EQ(error_code_of([] { MorletParams{0.0, 1.0}.validate(); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(error_code_of([] { MorletParams{6.0, -1.0}.validate(); }), ErrorCode::InvalidArgument);
}

TEST(Daughter, IdentityAtom) {
  const auto grid = sample_times(64, 32.0);
  const MorletParams p;
  const auto d = daughter_samples(p, {0.0, 1.0}, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) EXPECT_EQ(d[i], morlet(grid[i], p));
}

TEST(Daughter, NormIsScaleInvariant) {
  const MorletParams p;
  std::vector<double> grid;
  const double dt = 1e-3;
  for (double t = -60.0; t <= 60.0; t += dt) grid.push_back(t);
  auto l2 = [&](const WaveletAtom& a) {
    double s = 0;
    for (const auto& v : daughter_samples(p, a, grid)) s += std::norm(v);
    return std::sqrt(s * dt);
  };
  const double base = l2({0.0, 1.0});
  EXPECT_NEAR(base, 1.0, 1e-6);
  for (double a : {0.25, 0.5, 2.0, 4.0}) EXPECT_NEAR(l2({1.5, a}), base, 1e-6) << "a=" << a;
}

TEST(Daughter, DoublingScaleHalvesPeakFrequency) {
  const MorletParams p{12.0 * 2.0 * kPi / 8.0, 0.5};
  const double fs = 256.0;
  const auto grid = sample_times(1024, fs);
  auto peak = [&](double a) {
    const auto d = daughter_samples(p, {2.0, a}, grid);
    return static_cast<double>(argmax_bin(naive_dft(d)));
  };
  const double f1 = peak(1.0) * fs / 1024.0, f2 = peak(2.0) * fs / 1024.0;
  EXPECT_NEAR(f1, p.omega0 / (2 * kPi), 0.25);
  EXPECT_NEAR(f2, f1 / 2.0, 0.25);
}

TEST(Daughter, RejectsBadInput) {
  const auto grid = sample_times(8, 8.0);
  EXPECT_EQ(error_code_of([&] { daughter_samples({}, {0.0, 0.0}, grid); }),
            ErrorCode::NonPositiveScale);
  const std::vector<double> uneven = {0.0, 0.1, 0.3};
  EXPECT_EQ(error_code_of([&] { daughter_samples({}, {0.0, 1.0}, uneven); }),
            ErrorCode::InvalidArgument);
}

TEST(Cwt, ZeroInputAndLinearity) {
  const MorletParams p;
  const auto scales = log_scale_grid(p, 1.0, 64.0, 8);
  const auto shifts = sample_times(64, 256.0);
  const std::vector<double> zero(64, 0.0);
  const auto wz = cwt(zero, 256.0, p, scales, shifts);
  for (const auto& c : wz.coefficients.data()) EXPECT_EQ(c, 0.0);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    const auto x1 = random_real(rng, 64), x2 = random_real(rng, 64);
    std::vector<double> sum(64);
    for (std::size_t i = 0; i < 64; ++i) sum[i] = x1[i] + x2[i];
    const auto w1 = cwt(x1, 256.0, p, scales, shifts), w2 = cwt(x2, 256.0, p, scales, shifts),
               ws = cwt(sum, 256.0, p, scales, shifts);
    double worst = 0;
    for (std::size_t i = 0; i < ws.coefficients.size(); ++i) {
      worst = std::max(worst, std::abs(ws.coefficients.data()[i] - w1.coefficients.data()[i] -
                                       w2.coefficients.data()[i]));
    }
    EXPECT_LT(worst, 1e-9) << "seed " << seed;
  }
}

TEST(Cwt, PeakAtInjectedAtom) {
  const MorletParams p;
  const double fs = 256.0;
  const auto scales = log_scale_grid(p, 4.0, 64.0, 16);
  const auto shifts = sample_times(256, fs);
  const auto grid = sample_times(256, fs);
  const std::size_t si = 6, ti = 128;
  const auto atom = daughter_samples(p, {shifts[ti], scales[si]}, grid);
  std::vector<double> x(256);
  for (std::size_t i = 0; i < 256; ++i) x[i] = atom[i].real();
  const auto r = cwt(x, fs, p, scales, shifts);
  std::size_t best = 0;
  for (std::size_t i = 1; i < r.coefficients.size(); ++i) {
    if (std::abs(r.coefficients.data()[i]) > std::abs(r.coefficients.data()[best])) best = i;
  }
  EXPECT_EQ(best / shifts.size(), si);
  EXPECT_EQ(best % shifts.size(), ti);
}

TEST(Cwt, DefaultGridShape) {
  Rng rng(2);
  const auto x = random_real(rng, 32);
  const auto r = cwt(x, 256.0);
  EXPECT_EQ(r.coefficients.rows(), 32u);
  EXPECT_EQ(r.coefficients.cols(), 32u);
  EXPECT_NEAR(frequency_for_scale(r.scale_grid.front(), {}), 1.0, 1e-12);
  EXPECT_NEAR(frequency_for_scale(r.scale_grid.back(), {}), 64.0, 1e-9);
}

TEST(Cwt, Errors) {
  const std::vector<double> x(16, 1.0);
  const std::vector<double> none;
  const std::vector<double> bad_scale = {1.0, -2.0};
  const std::vector<double> shifts = {0.0};
  EXPECT_EQ(error_code_of([&] { cwt(x, 16.0, {}, none, shifts); }), ErrorCode::EmptyGrid);
  EXPECT_EQ(error_code_of([&] { cwt(x, 16.0, {}, bad_scale, shifts); }),
            ErrorCode::NonPositiveScale);
}

TEST(Fft, MatchesNaiveOracle) {
  Rng rng(3);
  for (std::size_t n : {1u, 2u, 8u, 256u, 100u, 7u}) {
    std::vector<Complex> x(n);
    for (auto& v : x) v = {normal(rng), normal(rng)};
    const auto fast = dft(std::span<const Complex>(x), 1.0).bins;
    const auto ref = naive_dft(x);
    for (std::size_t k = 0; k < n; ++k) EXPECT_LT(std::abs(fast[k] - ref[k]), 1e-9) << n;
  }
}

TEST(Fft, ConstantInput) {
  const std::vector<double> x(256, 2.5);
  const auto s = dft(x, 256.0);
  EXPECT_NEAR(std::abs(s.bins[0] - Complex(256 * 2.5)), 0.0, 1e-12);
  for (std::size_t k = 1; k < 256; ++k) EXPECT_LT(std::abs(s.bins[k]), 1e-12);
}

TEST(Fft, ComplexExponential) {
  const std::size_t n = 256, k0 = 37;
  std::vector<Complex> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = std::polar(1.0, 2 * kPi * double(k0 * i % n) / n);
  const auto s = dft(std::span<const Complex>(x), 256.0);
  for (std::size_t k = 0; k < n; ++k) {
    EXPECT_LT(std::abs(s.bins[k] - Complex(k == k0 ? 256.0 : 0.0)), 1e-10);
  }
}

TEST(Fft, Resolution) {
  const std::vector<double> x(256, 0.0);
  const auto s = dft(x, 256.0);
  EXPECT_EQ(s.delta_f, 1.0);
  EXPECT_EQ(s.n, 256u);
  EXPECT_EQ(s.bins.size(), 256u);
  EXPECT_EQ(error_code_of([] { dft(std::vector<double>{}, 1.0); }), ErrorCode::EmptyInput);
}

TEST(Fft, ParsevalAndInverse) {
  Rng rng(4);
  for (int rep = 0; rep < 20; ++rep) {
    const auto x = random_real(rng, 256);
    const auto s = dft(x, 256.0);
    double lhs = energy(x), rhs = 0;
    for (const auto& b : s.bins) rhs += std::norm(b);
    EXPECT_NEAR(lhs, rhs / 256.0, 1e-9 * std::max(1.0, lhs));
    const auto back = idft(s);
    for (std::size_t i = 0; i < 256; ++i) EXPECT_LT(std::abs(back[i] - x[i]), 1e-9);
  }
}

TEST(Bands, ToneInAlpha) {
  std::vector<double> x(256);
  for (std::size_t i = 0; i < 256; ++i) x[i] = std::sin(2 * kPi * 10.0 * i / 256.0);
  const auto d = band_decompose(x, 256.0);
  EXPECT_GE(energy(d[Band::alpha]) / energy(x), 0.99);
}

TEST(Bands, ConstantInDelta) {
  const std::vector<double> x(256, -3.0);
  const auto d = band_decompose(x, 256.0);
  for (std::size_t i = 0; i < 256; ++i) {
    EXPECT_NEAR(d[Band::delta][i], -3.0, 1e-12);
    EXPECT_NEAR(d[Band::theta][i], 0.0, 1e-12);
    EXPECT_NEAR(d[Band::alpha][i], 0.0, 1e-12);
    EXPECT_NEAR(d[Band::beta][i], 0.0, 1e-12);
  }
}

TEST(Bands, EdgesAndPartition) {
  EXPECT_EQ(band_edges(Band::delta).lo, 0.0);
  EXPECT_EQ(band_edges(Band::theta).lo, 4.0);
  EXPECT_EQ(band_edges(Band::alpha).lo, 8.0);
  EXPECT_EQ(band_edges(Band::alpha).hi, 12.0);
  EXPECT_EQ(band_edges(Band::beta).hi, 20.0);
  Rng rng(5);
  for (int rep = 0; rep < 20; ++rep) {
    const auto x = random_real(rng, 256);
    const auto d = band_decompose(x, 256.0);
    for (std::size_t i = 0; i < 256; ++i) {
      double sum = d.residual[i];
      for (Band b : kBands) sum += d[b][i];
      EXPECT_LT(std::abs(sum - x[i]), 1e-9);
    }
  }
}

TEST(Bands, SpectrallyDisjoint) {
  Rng rng(6);
  const auto x = random_real(rng, 256);
  const auto d = band_decompose(x, 256.0);
  for (Band b : kBands) {
    const auto s = dft(d[b], 256.0);
    const auto [lo, hi] = band_edges(b);
    for (std::size_t k = 0; k < 256; ++k) {
      const double f = k <= 128 ? double(k) : double(256 - k);
      if (f < lo || f >= hi) {
        EXPECT_LT(std::abs(s.bins[k]), 1e-9) << to_string(b) << " bin " << k;
      }
    }
  }
}

TEST(Bands, SwtReconstructsAndRejects) {
  Rng rng(7);
  const auto x = random_real(rng, 256);
  const auto d = band_decompose(x, 256.0, BandMethod::swt_dyadic);
  for (std::size_t i = 0; i < 256; ++i) {
    double sum = d.residual[i];
    for (Band b : kBands) sum += d[b][i];
    EXPECT_NEAR(sum, x[i], 1e-9);
  }
  std::vector<double> tone(256);
  for (std::size_t i = 0; i < 256; ++i) tone[i] = std::sin(2 * kPi * 10.0 * i / 256.0);
  const auto t = band_decompose(tone, 256.0, BandMethod::swt_dyadic);
  EXPECT_GT(energy(t[Band::alpha]), energy(t[Band::theta]));
  EXPECT_GT(energy(t[Band::alpha]), energy(t[Band::beta]));
  EXPECT_EQ(error_code_of([&] { band_decompose(x, 128.0, BandMethod::swt_dyadic); }),
            ErrorCode::UnsupportedRate);
  const std::vector<double> odd(200, 1.0);
  EXPECT_EQ(error_code_of([&] { band_decompose(odd, 256.0, BandMethod::swt_dyadic); }),
            ErrorCode::LengthNotPowerOfTwo);
}

TEST(Pca, RankOne) {
  Rng rng(8);
  std::vector<double> v(64);
  for (auto& e : v) e = normal(rng);
  MatrixD X(200, 64);
  for (std::size_t r = 0; r < 200; ++r) {
    const double s = normal(rng, 0, 3);
    for (std::size_t c = 0; c < 64; ++c) X(r, c) = s * v[c];
  }
  const auto m = pca_fit(X);
  EXPECT_GT(m.explained_variance[0], 1.0);
  for (std::size_t i = 1; i < 64; ++i) EXPECT_LT(m.explained_variance[i], 1e-9);
}

TEST(Pca, OrthonormalAndFullReconstruction) {
  Rng rng(9);
  MatrixD X(256, 64);
  for (auto& v : X.data()) v = normal(rng, 0, 5);
  const auto m = pca_fit(X);
  for (std::size_t i = 0; i < 64; ++i) {
    if (i > 0) {
      EXPECT_LE(m.explained_variance[i], m.explained_variance[i - 1]);
    }
    for (std::size_t j = 0; j < 64; ++j) {
      double dot = 0;
      for (std::size_t c = 0; c < 64; ++c) dot += m.components(i, c) * m.components(j, c);
      EXPECT_NEAR(dot, i == j ? 1.0 : 0.0, 1e-9);
    }
  }
  for (std::size_t r = 0; r < 256; ++r) {
    std::vector<double> score(64, 0.0);
    for (std::size_t i = 0; i < 64; ++i) {
      for (std::size_t c = 0; c < 64; ++c) score[i] += (X(r, c) - m.mean[c]) * m.components(i, c);
    }
    for (std::size_t c = 0; c < 64; ++c) {
      double rec = m.mean[c];
      for (std::size_t i = 0; i < 64; ++i) rec += score[i] * m.components(i, c);
      EXPECT_NEAR(rec, X(r, c), 1e-9);
    }
  }
}

TEST(Pca, IsotropicMonteCarlo) {
  Rng rng(10);
  MatrixD X(100000, 64);
  for (auto& v : X.data()) v = normal(rng);
  const auto m = pca_fit(X);
  for (double ev : m.explained_variance) {
    EXPECT_GE(ev, 0.9);
    EXPECT_LE(ev, 1.1);
  }
}

TEST(Pca, Degenerate) {
  EXPECT_EQ(error_code_of([] { pca_fit(MatrixD(1, 64)); }), ErrorCode::DegenerateInput);
}

class Removal : public ::testing::Test {
 protected:
  void SetUp() override {
    Rng rng(11);
    trial = testing_support::noise_trial(rng, Group::control, "x");
    model = pca_fit(trial);
  }
  Trial trial;
  PcaModel model;
};

TEST_F(Removal, KZeroIsIdentity) {
  EXPECT_EQ(remove_artifacts(trial, model, DropTopK{0}).data.data(), trial.data.data());
}

TEST_F(Removal, KSixtyFourLeavesMean) {
  const auto out = remove_artifacts(trial, model, DropTopK{64});
  for (std::size_t c = 0; c < 64; ++c) {
    for (std::size_t s = 0; s < 256; ++s) EXPECT_NEAR(out.data(c, s), model.mean[c], 1e-9);
  }
}

TEST_F(Removal, ProjectionOntoRemovedIsZeroAndIdempotent) {
  for (int k : {1, 5, 20}) {
    const auto once = remove_artifacts(trial, model, DropTopK{k});
    const auto twice = remove_artifacts(once, model, DropTopK{k});
    for (std::size_t i = 0; i < once.data.size(); ++i) {
      EXPECT_NEAR(once.data.data()[i], twice.data.data()[i], 1e-9);
    }
    for (int r = 0; r < k; ++r) {
      for (std::size_t s = 0; s < 256; ++s) {
        double proj = 0;
        for (std::size_t c = 0; c < 64; ++c) proj += (once.data(c, s) - model.mean[c]) * model.components(r, c);
        EXPECT_NEAR(proj, 0.0, 1e-9);
      }
    }
  }
}

TEST_F(Removal, InvalidK) {
  EXPECT_EQ(error_code_of([&] { remove_artifacts(trial, model, DropTopK{-1}); }), ErrorCode::InvalidK);
  EXPECT_EQ(error_code_of([&] { remove_artifacts(trial, model, DropTopK{65}); }), ErrorCode::InvalidK);
}

TEST(BlinkRemoval, FrontalBlinkSuppressed) {
  Rng rng(12);
  const auto& map = ElectrodeMap::standard();
  const FrontalLoading policy;
  for (int rep = 0; rep < 5; ++rep) {
    Trial bg = testing_support::noise_trial(rng, Group::control, "b");
    for (auto& v : bg.data.data()) v *= 0.5;
    Trial t = bg;
    const double centre = uniform(rng, 0.3, 0.7), width = 0.05;
    std::vector<double> gain(64, 0.0);
    for (const auto& name : policy.electrodes) gain[map.index_or_throw(name) - 1] = uniform(rng, 0.8, 1.2);
    for (std::size_t s = 0; s < 256; ++s) {
      const double u = (s / 256.0 - centre) / width;
      for (std::size_t c = 0; c < 64; ++c) t.data(c, s) += 200.0 * gain[c] * std::exp(-0.5 * u * u);
    }
    const auto m = pca_fit(t);
    const auto cleaned = remove_artifacts(t, m, policy);
    const auto cleaned_bg = remove_artifacts(bg, m, policy);
    double before = 0, after = 0;
    for (const auto& name : policy.electrodes) {
      const auto c = map.index_or_throw(name) - 1;
      for (std::size_t s = 0; s < 256; ++s) {
        before = std::max(before, std::abs(t.data(c, s) - bg.data(c, s)));
        after = std::max(after, std::abs(cleaned.data(c, s) - cleaned_bg.data(c, s)));
      }
    }
    EXPECT_GE(before / after, 10.0) << "rep " << rep;
  }
}

TEST(DspExport, CsvShapes) {
  std::vector<double> x(256, 1.0);
  const auto b = bands_to_csv(band_decompose(x, 256.0), 256.0);
  EXPECT_EQ(b.substr(0, b.find('\n')), "time_s,delta,theta,alpha,beta,residual");
  EXPECT_EQ(std::count(b.begin(), b.end(), '\n'), 257);
  const auto s = spectrum_to_csv(dft(x, 256.0));
  EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 257);
}

TEST(DspConfig, JsonRoundTrip) {
  DspConfig c;
  c.morlet = {5.0, 0.5};
  c.band_method = BandMethod::swt_dyadic;
  c.pca = FrontalLoading{0.4};
  const auto back = dsp_config_from_json(to_json(c));
  EXPECT_EQ(to_json(back), to_json(c));
  EXPECT_EQ(config_hash(back), config_hash(c));
}
