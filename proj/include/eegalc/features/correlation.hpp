#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <tuple>
#include <vector>

#include "eegalc/error.hpp"
#include "eegalc/ingest/electrode_map.hpp"
#include "eegalc/ingest/trial.hpp"
#include "eegalc/matrix.hpp"

namespace eegalc {

/// Channel x channel Pearson correlation over the time samples of one trial.
struct CorrelationMatrix {
  MatrixD values;
  const ElectrodeMap* map = &ElectrodeMap::standard();
};

/// Pearson correlation between the rows of `data`. A constant row gets zero
/// correlation with every other row and 1 on the diagonal.
inline MatrixD pearson_rows(const MatrixD& data) {
  const std::size_t ch = data.rows();
  const std::size_t n = data.cols();
  MatrixD centred(ch, n);
  std::vector<double> norm(ch, 0.0);
  std::vector<bool> constant(ch, true);
  for (std::size_t c = 0; c < ch; ++c) {
    const auto row = data.row(c);
    double mean = 0.0;
    for (double v : row) mean += v;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
      if (row[s] != row[0]) constant[c] = false;
      const double d = row[s] - mean;
      centred(c, s) = d;
      ss += d * d;
    }
    if (ss == 0.0) constant[c] = true;
    norm[c] = std::sqrt(ss);
  }
  MatrixD r(ch, ch, 0.0);
  for (std::size_t i = 0; i < ch; ++i) {
    r(i, i) = 1.0;
    if (constant[i]) continue;
    const auto a = centred.row(i);
    for (std::size_t j = i + 1; j < ch; ++j) {
      if (constant[j]) continue;
      const auto b = centred.row(j);
      double dot = 0.0;
      for (std::size_t s = 0; s < n; ++s) dot += a[s] * b[s];
      const double v = std::clamp(dot / (norm[i] * norm[j]), -1.0, 1.0);
      r(i, j) = v;
      r(j, i) = v;
    }
  }
  return r;
}

inline CorrelationMatrix correlation_matrix(const Trial& t) {
  return {pearson_rows(t.data), &ElectrodeMap::standard()};
}

/// Element-wise mean of per-trial correlation matrices for one group.
inline CorrelationMatrix mean_correlation(const TrialSet& set, Group group) {
  MatrixD acc(kChannels, kChannels, 0.0);
  std::size_t count = 0;
  for (const auto& t : set.trials()) {
    if (t.group != group) continue;
    const auto c = pearson_rows(t.data);
    for (std::size_t i = 0; i < acc.size(); ++i) acc.data()[i] += c.data()[i];
    ++count;
  }
  if (count == 0) fail(ErrorCode::EmptyClass, std::string(to_string(group)) + " group absent");
  for (auto& v : acc.data()) v /= static_cast<double>(count);
  return {acc, &ElectrodeMap::standard()};
}

struct ElectrodePair {
  std::string a;
  std::string b;
  double value = 0.0;
  std::size_t index_a = 0;  // 1-based
  std::size_t index_b = 0;
};

/// The k off-diagonal pairs with the largest |value|, sorted descending;
/// ties go to the lexicographically smaller (i, j).
inline std::vector<ElectrodePair> top_correlated_pairs(const CorrelationMatrix& c, std::size_t k) {
  const std::size_t n = c.values.rows();
  const std::size_t max_pairs = n * (n - 1) / 2;
  if (k < 1) fail(ErrorCode::InvalidArgument, "k must be >= 1");
  if (k > max_pairs) fail(ErrorCode::KTooLarge, "k = " + std::to_string(k));

  std::vector<std::tuple<double, std::size_t, std::size_t>> all;
  all.reserve(max_pairs);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) all.emplace_back(std::abs(c.values(i, j)), i, j);
  }
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end(),
                    [](const auto& x, const auto& y) {
                      if (std::get<0>(x) != std::get<0>(y)) return std::get<0>(x) > std::get<0>(y);
                      return std::tie(std::get<1>(x), std::get<2>(x)) <
                             std::tie(std::get<1>(y), std::get<2>(y));
                    });
  std::vector<ElectrodePair> out;
  out.reserve(k);
  for (std::size_t r = 0; r < k; ++r) {
    const auto [mag, i, j] = all[r];
    out.push_back({std::string(c.map->name(i + 1)), std::string(c.map->name(j + 1)),
                   c.values(i, j), i + 1, j + 1});
  }
  return out;
}

}  // namespace eegalc
