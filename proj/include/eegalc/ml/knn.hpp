#pragma once

#include <algorithm>
#include <tuple>
#include <vector>

#include "eegalc/ml/classifier.hpp"

namespace eegalc::ml {

/// Euclidean k-nearest neighbours; score is the fraction of class-1 neighbours.
/// Distance ties prefer label 0, then the smaller training index; an even
/// split of votes predicts 0.
class KNearestNeighbors final : public Classifier {
 public:
  KNearestNeighbors(ClassifierSpec spec, LabeledVectors train, std::size_t k)
      : Classifier(std::move(spec), train.dim()), train_(std::move(train)), k_(k) {}

  nlohmann::json params() const override {
    return {{"k", k_}, {"rows", train_.size()}, {"x", train_.x.data()}, {"y", train_.y}};
  }

 protected:
  Prediction predict_unchecked(std::span<const double> x) const override {
    const std::size_t n = train_.size();
    std::vector<std::tuple<double, int, std::size_t>> dist(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto r = train_.x.row(i);
      double s = 0.0;
      for (std::size_t j = 0; j < x.size(); ++j) s += (r[j] - x[j]) * (r[j] - x[j]);
      dist[i] = {s, train_.y[i], i};
    }
    const std::size_t k = std::min(k_, n);
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
    std::size_t ones = 0;
    for (std::size_t i = 0; i < k; ++i) ones += std::get<1>(dist[i]) == 1;
    const double score = static_cast<double>(ones) / static_cast<double>(k);
    return {2 * ones > k ? 1 : 0, score};
  }

 private:
  LabeledVectors train_;
  std::size_t k_;
};

inline ClassifierPtr fit_knn(const ClassifierSpec& spec, const LabeledVectors& d) {
  const int k = detail::positive_int(spec, "k", 1);
  return std::make_unique<KNearestNeighbors>(spec, d, static_cast<std::size_t>(k));
}

}  // namespace eegalc::ml
