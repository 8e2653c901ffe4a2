#pragma once

#include <cmath>
#include <numeric>
#include <thread>
#include <vector>

#include "eegalc/ml/cart.hpp"
#include "eegalc/rng.hpp"

namespace eegalc::ml {

/// Majority vote of Gini trees; score is the fraction of trees voting 1 and
/// an even split predicts 0.
class RandomForest final : public Classifier {
 public:
  RandomForest(ClassifierSpec spec, std::size_t dim, std::vector<TreeNodes> trees)
      : Classifier(std::move(spec), dim), trees_(std::move(trees)) {}

  const std::vector<TreeNodes>& trees() const { return trees_; }

  nlohmann::json params() const override {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& t : trees_) arr.push_back(t.to_json());
    return {{"trees", arr}};
  }

 protected:
  Prediction predict_unchecked(std::span<const double> x) const override {
    std::size_t votes = 0;
    for (const auto& t : trees_) votes += leaf_label(t.leaf_value(x));
    const double score = static_cast<double>(votes) / static_cast<double>(trees_.size());
    return {2 * votes > trees_.size() ? 1 : 0, score};
  }

 private:
  std::vector<TreeNodes> trees_;
};

/// Tree t draws from its own generator seeded by derive_seed(spec.seed, t), so
/// the result is independent of `jobs`.
inline ClassifierPtr fit_random_forest(const ClassifierSpec& spec, const LabeledVectors& d,
                                       unsigned jobs = 1) {
  detail::require_two_classes(d, spec.kind);
  const int n_trees = detail::positive_int(spec, "trees", 1);
  const int max_features = detail::positive_int(spec, "max_features", 0);
  const bool bootstrap = spec.param("bootstrap") != 0.0;
  TreeGrowth g;
  g.max_depth = detail::positive_int(spec, "max_depth", 0);
  g.min_leaf = detail::positive_int(spec, "min_leaf", 1);
  g.max_features = max_features > 0
                       ? static_cast<std::size_t>(max_features)
                       : std::max<std::size_t>(1, static_cast<std::size_t>(
                                                      std::floor(std::sqrt(double(d.dim())))));

  std::vector<TreeNodes> trees(static_cast<std::size_t>(n_trees));
  auto grow_one = [&](std::size_t t) {
    Rng rng(derive_seed(spec.seed, t));
    std::vector<std::size_t> idx(d.size());
    if (bootstrap) {
      for (auto& i : idx) i = uniform_index(rng, d.size());
    } else {
      std::iota(idx.begin(), idx.end(), 0);
    }
    detail::TreeBuilder b(d, g, &rng);
    trees[t] = b.build(std::move(idx));
  };

  jobs = std::max(1u, jobs);
  if (jobs == 1) {
    for (std::size_t t = 0; t < trees.size(); ++t) grow_one(t);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < jobs; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t t = w; t < trees.size(); t += jobs) grow_one(t);
      });
    }
    for (auto& th : pool) th.join();
  }
  return std::make_unique<RandomForest>(spec, d.dim(), std::move(trees));
}

}  // namespace eegalc::ml
