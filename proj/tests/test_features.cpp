#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <set>

#include "support.hpp"

using namespace eegalc;
using testing_support::error_code_of;
using testing_support::noise_trial;
using testing_support::TempDir;

namespace {

double pearson_oracle(std::span<const double> a, std::span<const double> b) {
  long double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) ma += a[i], mb += b[i];
  ma /= a.size();
  mb /= b.size();
  long double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return static_cast<double>(sab / std::sqrt(saa * sbb));
}

Trial mixed_trial(Rng& rng) {
  Trial t = noise_trial(rng, Group::control, "m");
  // Shared component so correlations are not all near zero.
  std::vector<double> common(kSamples);
  for (auto& v : common) v = normal(rng, 0, 10);
  for (std::size_t c = 0; c < kChannels; ++c) {
    const double w = uniform(rng, -1, 1);
    for (std::size_t s = 0; s < kSamples; ++s) t.data(c, s) += w * common[s];
  }
  return t;
}

}  // namespace

TEST(Correlation, MatchesOracleAndInvariants) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    const Trial t = mixed_trial(rng);
    const auto c = correlation_matrix(t).values;
    Eigen::MatrixXd e(64, 64);
    for (std::size_t i = 0; i < 64; ++i) {
      EXPECT_NEAR(c(i, i), 1.0, 1e-12);
      for (std::size_t j = 0; j < 64; ++j) {
        EXPECT_EQ(c(i, j), c(j, i));
        EXPECT_LE(std::abs(c(i, j)), 1.0 + 1e-12);
        e(i, j) = c(i, j);
      }
    }
    if (seed < 10) {
      for (std::size_t i = 0; i < 64; i += 7) {
        for (std::size_t j = i + 1; j < 64; j += 5) {
          EXPECT_NEAR(c(i, j), pearson_oracle(t.data.row(i), t.data.row(j)), 1e-12);
        }
      }
    }
    EXPECT_GE(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(e).eigenvalues().minCoeff(), -1e-9);
  }
}

TEST(Correlation, AffineAndSign) {
  Rng rng(1);
  Trial t = noise_trial(rng, Group::control, "x");
  for (std::size_t s = 0; s < kSamples; ++s) {
    t.data(9, s) = 2.0 * t.data(3, s) + 5.0;
    t.data(10, s) = -t.data(3, s);
  }
  const auto c = correlation_matrix(t).values;
  EXPECT_NEAR(c(3, 9), 1.0, 1e-12);
  EXPECT_NEAR(c(3, 10), -1.0, 1e-12);
}

TEST(Correlation, InvariantUnderPositiveAffineMaps) {
  Rng rng(2);
  const Trial t = mixed_trial(rng);
  Trial u = t;
  for (std::size_t c = 0; c < kChannels; ++c) {
    const double a = uniform(rng, 0.1, 10), b = uniform(rng, -50, 50);
    for (std::size_t s = 0; s < kSamples; ++s) u.data(c, s) = a * t.data(c, s) + b;
  }
  const auto x = correlation_matrix(t).values, y = correlation_matrix(u).values;
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(x.data()[i], y.data()[i], 1e-9);
}

TEST(Correlation, ConstantChannel) {
  Rng rng(3);
  Trial t = noise_trial(rng, Group::control, "x");
  for (std::size_t s = 0; s < kSamples; ++s) t.data(5, s) = 4.2;
  const auto c = correlation_matrix(t).values;
  for (std::size_t j = 0; j < 64; ++j) {
    EXPECT_EQ(c(5, j), j == 5 ? 1.0 : 0.0);
    EXPECT_EQ(c(j, 5), j == 5 ? 1.0 : 0.0);
  }
}

TEST(TopPairs, IdentityGivesZeros) {
  CorrelationMatrix c{MatrixD(64, 64, 0.0)};
  for (std::size_t i = 0; i < 64; ++i) c.values(i, i) = 1.0;
  for (const auto& p : top_correlated_pairs(c, 10)) EXPECT_EQ(p.value, 0.0);
  const auto first = top_correlated_pairs(c, 2);
  EXPECT_EQ(first[0].index_a, 1u);
  EXPECT_EQ(first[0].index_b, 2u);
  EXPECT_EQ(first[1].index_b, 3u);
}

TEST(TopPairs, SingleEntry) {
  CorrelationMatrix c{MatrixD(64, 64, 0.0)};
  for (std::size_t i = 0; i < 64; ++i) c.values(i, i) = 1.0;
  c.values(2, 6) = c.values(6, 2) = 0.9;  // 1-based (3,7)
  const auto p = top_correlated_pairs(c, 1);
  EXPECT_EQ(p[0].a, "F7");
  EXPECT_EQ(p[0].b, "FZ1");
  EXPECT_EQ(p[0].value, 0.9);
}

TEST(TopPairs, SortedUniqueAndBounded) {
  Rng rng(4);
  const auto c = correlation_matrix(mixed_trial(rng));
  const auto pairs = top_correlated_pairs(c, 2016);
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    EXPECT_LT(pairs[i].index_a, pairs[i].index_b);
    EXPECT_TRUE(seen.emplace(pairs[i].index_a, pairs[i].index_b).second);
    if (i > 0) {
      EXPECT_GE(std::abs(pairs[i - 1].value), std::abs(pairs[i].value));
    }
  }
  EXPECT_EQ(error_code_of([&] { top_correlated_pairs(c, 2017); }), ErrorCode::KTooLarge);
}

TEST(FeatureTensor, ShapesPerKind) {
  Rng rng(5);
  const Trial t = noise_trial(rng, Group::alcoholic, "x");
  for (auto k : kAllFeatureKinds) {
    const auto ft = feature_tensor(t, k);
    EXPECT_EQ(ft.shape, feature_shape(k));
    EXPECT_EQ(ft.data.size(), ft.size());
    EXPECT_EQ(ft.label, Group::alcoholic);
    double mean = 0, var = 0;
    for (double v : ft.data) mean += v;
    mean /= ft.data.size();
    for (double v : ft.data) var += (v - mean) * (v - mean);
    var /= ft.data.size();
    EXPECT_NEAR(mean, 0.0, 1e-9) << to_string(k);
    EXPECT_NEAR(var, 1.0, 1e-9) << to_string(k);
  }
  EXPECT_EQ(feature_shape(FeatureKind::correlation), (TensorShape{1, 64, 64}));
  EXPECT_EQ(feature_shape(FeatureKind::fft), (TensorShape{1, 64, 129}));
  EXPECT_EQ(feature_shape(FeatureKind::raw), (TensorShape{1, 64, 256}));
}

TEST(FeatureTensor, ZeroTrialIsZero) {
  Trial t;
  t.data = MatrixD(64, 256, 0.0);
  for (auto k : {FeatureKind::raw, FeatureKind::fft, FeatureKind::alpha}) {
    for (double v : feature_tensor(t, k).data) EXPECT_EQ(v, 0.0);
  }
}

TEST(FeatureTensor, FftPayloadIsOneSidedMagnitude) {
  Rng rng(6);
  const Trial t = noise_trial(rng, Group::control, "x");
  const auto p = feature_payload(t, FeatureKind::fft, {});
  ASSERT_EQ(p.size(), 64u * 129u);
  const auto s = dft(t.data.row(3), 256.0);
  for (std::size_t k = 0; k < 129; ++k) EXPECT_NEAR(p[3 * 129 + k], std::abs(s.bins[k]), 1e-9);
}

TEST(FeatureTensor, CorrelationFlattensUpperTriangle) {
  Rng rng(7);
  const auto ft = feature_tensor(mixed_trial(rng), FeatureKind::correlation);
  const auto flat = flatten(ft);
  ASSERT_EQ(flat.size(), 2016u);
  EXPECT_EQ(flat[0], ft.at(0, 0, 1));
  EXPECT_EQ(flat[62], ft.at(0, 0, 63));
  EXPECT_EQ(flat[63], ft.at(0, 1, 2));
  EXPECT_EQ(flatten(feature_tensor(mixed_trial(rng), FeatureKind::raw)).size(), 16384u);
}

TEST(FeatureTensor, ParseKind) {
  for (auto k : kAllFeatureKinds) EXPECT_EQ(parse_feature_kind(to_string(k)), k);
  EXPECT_EQ(error_code_of([] { parse_feature_kind("gamma"); }), ErrorCode::InvalidArgument);
}

TEST(TensorIo, RoundTripAndHeader) {
  TempDir dir("tensor");
  Rng rng(8);
  const auto ft = feature_tensor(noise_trial(rng, Group::alcoholic, "x"), FeatureKind::fft);
  save_feature_tensor(ft, dir / "t", "src/a.rd", "abc");
  const auto bytes = read_file_bytes(dir / "t.bin");
  ASSERT_EQ(bytes.size(), 16 + 8 * ft.size());
  EXPECT_EQ(bytes.substr(0, 3), "EGT");
  EXPECT_EQ(static_cast<unsigned char>(bytes[3]), 6);
  EXPECT_EQ(static_cast<unsigned char>(bytes[12]), 129);
  const auto back = load_feature_tensor(dir / "t");
  EXPECT_EQ(back.data, ft.data);
  EXPECT_EQ(back.shape, ft.shape);
  EXPECT_EQ(back.label, Group::alcoholic);
  const auto side = nlohmann::json::parse(read_file_bytes(dir / "t.json"));
  EXPECT_EQ(side.at("provenance"), "src/a.rd");
  EXPECT_EQ(side.at("dsp_config_hash"), "abc");
  EXPECT_EQ(error_code_of([&] { decode_tensor(bytes.substr(0, bytes.size() - 1)); }),
            ErrorCode::IoError);
}

TEST(GroupStats, IdenticalAndShifted) {
  Rng rng(9);
  const Trial base = noise_trial(rng, Group::control, "c");
  Trial same = base;
  same.group = Group::alcoholic;
  EXPECT_EQ(group_voltage_stats(TrialSet({base, same}, {})).fraction_alcoholic_lower, 0.0);
  Trial lower = same;
  for (auto& v : lower.data.data()) v -= 1.0;
  const auto st = group_voltage_stats(TrialSet({base, lower}, {}));
  EXPECT_EQ(st.fraction_alcoholic_lower, 1.0);
  EXPECT_EQ(st.per_electrode_mean.at(Group::alcoholic).size(), 64u);
  EXPECT_EQ(error_code_of([&] { group_voltage_stats(TrialSet({base}, {})); }), ErrorCode::EmptyClass);
}

TEST(Heatmap, IdentityDiagonalAtMaximum) {
  FeatureTensor ft;
  ft.kind = FeatureKind::correlation;
  ft.shape = {1, 64, 64};
  ft.data.assign(64 * 64, 0.0);
  for (std::size_t i = 0; i < 64; ++i) ft.data[i * 64 + i] = 1.0;
  const std::string svg = heatmap_svg(ft);
  std::size_t cells = 0, hot = 0, pos = 0;
  const std::string top = "fill=\"" + hex_color(diverging_color(1.0)) + "\"";
  while ((pos = svg.find("class=\"cell\"", pos)) != std::string::npos) {
    const auto end = svg.find("/>", pos);
    if (svg.substr(pos, end - pos).find(top) != std::string::npos) ++hot;
    ++cells;
    pos = end;
  }
  EXPECT_EQ(cells, 64u * 64u);
  EXPECT_EQ(hot, 64u);
  EXPECT_NE(svg.find(">FP1<"), std::string::npos);
}

TEST(Heatmap, DeterministicAndMidScaleForZeros) {
  TempDir dir("svg");
  FeatureTensor ft;
  ft.kind = FeatureKind::raw;
  ft.shape = {1, 64, 256};
  ft.data.assign(ft.size(), 0.0);
  render_heatmap(ft, dir / "a.svg");
  render_heatmap(ft, dir / "b.svg");
  const auto a = read_file_bytes(dir / "a.svg");
  EXPECT_EQ(a, read_file_bytes(dir / "b.svg"));
  EXPECT_EQ(a.find("nan"), std::string::npos);
  const std::string mid = "fill=\"" + hex_color(diverging_color(0.5)) + "\"";
  std::size_t n = 0;
  for (std::size_t p = a.find(mid); p != std::string::npos; p = a.find(mid, p + 1)) ++n;
  EXPECT_EQ(n, ft.size());
}
