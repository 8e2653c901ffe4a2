#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "eegalc/ml/classifier.hpp"
#include "eegalc/rng.hpp"

namespace eegalc::ml {

/// Flat binary tree. Node i is a leaf when feature[i] < 0; otherwise rows with
/// x[feature] <= threshold go to left[i]. value[i] is the class-1 fraction of
/// the training rows that reached the node.
struct TreeNodes {
  std::vector<int> feature;
  std::vector<double> threshold;
  std::vector<int> left;
  std::vector<int> right;
  std::vector<double> value;
  std::vector<int> samples;

  std::size_t size() const { return feature.size(); }

  int add_leaf(double v, int n) {
    feature.push_back(-1);
    threshold.push_back(0.0);
    left.push_back(-1);
    right.push_back(-1);
    value.push_back(v);
    samples.push_back(n);
    return static_cast<int>(feature.size()) - 1;
  }

  /// Class-1 fraction of the leaf reached by x.
  double leaf_value(std::span<const double> x) const {
    int i = 0;
    while (feature[i] >= 0) i = x[feature[i]] <= threshold[i] ? left[i] : right[i];
    return value[i];
  }

  std::size_t depth() const {
    std::size_t best = 0;
    std::vector<std::pair<int, std::size_t>> stack{{0, 0}};
    while (!stack.empty()) {
      auto [i, dep] = stack.back();
      stack.pop_back();
      best = std::max(best, dep);
      if (feature[i] >= 0) {
        stack.emplace_back(left[i], dep + 1);
        stack.emplace_back(right[i], dep + 1);
      }
    }
    return best;
  }

  nlohmann::json to_json() const {
    return {{"feature", feature}, {"threshold", threshold}, {"left", left},
            {"right", right},     {"value", value},         {"samples", samples}};
  }

  static TreeNodes from_json(const nlohmann::json& j) {
    TreeNodes t;
    t.feature = j.at("feature").get<std::vector<int>>();
    t.threshold = j.at("threshold").get<std::vector<double>>();
    t.left = j.at("left").get<std::vector<int>>();
    t.right = j.at("right").get<std::vector<int>>();
    t.value = j.at("value").get<std::vector<double>>();
    t.samples = j.at("samples").get<std::vector<int>>();
    return t;
  }
};

/// Majority label of a leaf; an exact tie predicts 0.
inline int leaf_label(double class1_fraction) { return class1_fraction > 0.5 ? 1 : 0; }

struct TreeGrowth {
  int max_depth = 12;
  int min_leaf = 2;
  std::size_t max_features = 0;  // 0: all features
};

namespace detail {

inline double gini(double ones, double n) {
  if (n <= 0) return 0.0;
  const double p = ones / n;
  return 2.0 * p * (1.0 - p);
}

/// Greedy depth-first Gini tree over rows `idx` (bootstrap duplicates allowed).
class TreeBuilder {
 public:
  TreeBuilder(const LabeledVectors& d, TreeGrowth g, Rng* rng) : d_(d), g_(g), rng_(rng) {
    features_.resize(d.dim());
    std::iota(features_.begin(), features_.end(), 0);
  }

  TreeNodes build(std::vector<std::size_t> idx) {
    TreeNodes t;
    grow(t, idx, 0);
    return t;
  }

 private:
  struct Split {
    int feature = -1;
    double threshold = 0.0;
    double impurity = 0.0;
  };

  int grow(TreeNodes& t, std::vector<std::size_t>& idx, int depth) {
    double ones = 0;
    for (auto i : idx) ones += d_.y[i];
    const double n = static_cast<double>(idx.size());
    const int node = t.add_leaf(ones / n, static_cast<int>(idx.size()));
    if (depth >= g_.max_depth || ones == 0 || ones == n ||
        idx.size() < 2 * static_cast<std::size_t>(g_.min_leaf)) {
      return node;
    }
    const Split s = best_split(idx, ones);
    if (s.feature < 0) return node;

    std::vector<std::size_t> lo, hi;
    for (auto i : idx) (d_.x(i, s.feature) <= s.threshold ? lo : hi).push_back(i);
    idx.clear();
    idx.shrink_to_fit();
    t.feature[node] = s.feature;
    t.threshold[node] = s.threshold;
    const int l = grow(t, lo, depth + 1);
    t.left[node] = l;
    const int r = grow(t, hi, depth + 1);
    t.right[node] = r;
    return node;
  }

  std::vector<std::size_t> candidate_features() {
    if (g_.max_features == 0 || g_.max_features >= features_.size()) return features_;
    // Partial Fisher-Yates over a scratch copy keeps draws reproducible.
    std::vector<std::size_t> pool = features_;
    for (std::size_t i = 0; i < g_.max_features; ++i) {
      const std::size_t j = i + uniform_index(*rng_, pool.size() - i);
      std::swap(pool[i], pool[j]);
    }
    pool.resize(g_.max_features);
    std::sort(pool.begin(), pool.end());
    return pool;
  }

  Split best_split(const std::vector<std::size_t>& idx, double ones) {
    const double n = static_cast<double>(idx.size());
    const std::size_t min_leaf = static_cast<std::size_t>(g_.min_leaf);
    Split best;
    best.impurity = gini(ones, n);
    bool found = false;
    std::vector<std::pair<double, int>> col(idx.size());
    for (auto f : candidate_features()) {
      for (std::size_t r = 0; r < idx.size(); ++r) col[r] = {d_.x(idx[r], f), d_.y[idx[r]]};
      std::sort(col.begin(), col.end());
      double left_ones = 0;
      for (std::size_t r = 0; r + 1 < col.size(); ++r) {
        left_ones += col[r].second;
        const std::size_t nl = r + 1;
        if (col[r].first == col[r + 1].first) continue;
        if (nl < min_leaf || idx.size() - nl < min_leaf) continue;
        const double dl = static_cast<double>(nl);
        const double dr = n - dl;
        const double imp = (dl * gini(left_ones, dl) + dr * gini(ones - left_ones, dr)) / n;
        if (!found || imp < best.impurity - 1e-15) {
          found = true;
          best.feature = static_cast<int>(f);
          best.impurity = imp;
          best.threshold = 0.5 * (col[r].first + col[r + 1].first);
          // Midpoint can round onto the upper value when they are adjacent doubles.
          if (!(best.threshold < col[r + 1].first)) best.threshold = col[r].first;
        }
      }
    }
    if (!found) best.feature = -1;
    return best;
  }

  const LabeledVectors& d_;
  TreeGrowth g_;
  Rng* rng_;
  std::vector<std::size_t> features_;
};

}  // namespace detail

/// Gini CART; score is the class-1 fraction of the reached leaf.
class DecisionTree final : public Classifier {
 public:
  DecisionTree(ClassifierSpec spec, std::size_t dim, TreeNodes nodes)
      : Classifier(std::move(spec), dim), nodes_(std::move(nodes)) {}

  const TreeNodes& nodes() const { return nodes_; }
  nlohmann::json params() const override { return nodes_.to_json(); }

 protected:
  Prediction predict_unchecked(std::span<const double> x) const override {
    const double v = nodes_.leaf_value(x);
    return {leaf_label(v), v};
  }

 private:
  TreeNodes nodes_;
};

inline ClassifierPtr fit_cart(const ClassifierSpec& spec, const LabeledVectors& d) {
  detail::require_two_classes(d, spec.kind);
  TreeGrowth g;
  g.max_depth = detail::positive_int(spec, "max_depth", 0);
  g.min_leaf = detail::positive_int(spec, "min_leaf", 1);
  std::vector<std::size_t> idx(d.size());
  std::iota(idx.begin(), idx.end(), 0);
  detail::TreeBuilder b(d, g, nullptr);
  return std::make_unique<DecisionTree>(spec, d.dim(), b.build(std::move(idx)));
}

}  // namespace eegalc::ml
