#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "eegalc/ml/classifier.hpp"

namespace eegalc::ml {

/// Gaussian naive Bayes; score is P(class 1 | x).
class GaussianNaiveBayes final : public Classifier {
 public:
  GaussianNaiveBayes(ClassifierSpec spec, std::array<std::vector<double>, 2> mean,
                     std::array<std::vector<double>, 2> var, std::array<double, 2> prior)
      : Classifier(std::move(spec), mean[0].size()),
        mean_(std::move(mean)),
        var_(std::move(var)),
        prior_(prior) {}

  nlohmann::json params() const override {
    return {{"mean0", mean_[0]}, {"mean1", mean_[1]}, {"var0", var_[0]},
            {"var1", var_[1]},   {"prior", prior_}};
  }

 protected:
  Prediction predict_unchecked(std::span<const double> x) const override {
    double log_odds = std::log(prior_[1]) - std::log(prior_[0]);
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double d0 = x[j] - mean_[0][j];
      const double d1 = x[j] - mean_[1][j];
      log_odds += -0.5 * std::log(var_[1][j]) - d1 * d1 / (2.0 * var_[1][j]);
      log_odds -= -0.5 * std::log(var_[0][j]) - d0 * d0 / (2.0 * var_[0][j]);
    }
    const double p = detail::sigmoid(log_odds);
    return {log_odds > 0.0 ? 1 : 0, p};
  }

 private:
  std::array<std::vector<double>, 2> mean_;
  std::array<std::vector<double>, 2> var_;
  std::array<double, 2> prior_;
};

/// Per-class mean/variance; every variance is padded by
/// var_smoothing * (largest per-feature variance of the whole set).
inline ClassifierPtr fit_gnb(const ClassifierSpec& spec, const LabeledVectors& d) {
  detail::require_two_classes(d, spec.kind);
  const double smoothing = detail::positive(spec, "var_smoothing", true);
  const std::size_t n = d.size(), dim = d.dim();
  std::array<std::vector<double>, 2> mean{std::vector<double>(dim, 0.0),
                                          std::vector<double>(dim, 0.0)};
  std::array<std::vector<double>, 2> var = mean;
  std::array<double, 2> count{0.0, 0.0};
  for (std::size_t i = 0; i < n; ++i) {
    const int c = d.y[i];
    count[c] += 1.0;
    const auto x = d.x.row(i);
    for (std::size_t j = 0; j < dim; ++j) mean[c][j] += x[j];
  }
  for (int c = 0; c < 2; ++c) {
    for (auto& m : mean[c]) m /= count[c];
  }
  for (std::size_t i = 0; i < n; ++i) {
    const int c = d.y[i];
    const auto x = d.x.row(i);
    for (std::size_t j = 0; j < dim; ++j) {
      const double e = x[j] - mean[c][j];
      var[c][j] += e * e;
    }
  }
  for (int c = 0; c < 2; ++c) {
    for (auto& v : var[c]) v /= count[c];
  }
  double max_var = 0.0;
  for (std::size_t j = 0; j < dim; ++j) {
    double mu = 0.0, ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) mu += d.x(i, j);
    mu /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) ss += (d.x(i, j) - mu) * (d.x(i, j) - mu);
    max_var = std::max(max_var, ss / static_cast<double>(n));
  }
  double eps = smoothing * max_var;
  if (eps <= 0.0) eps = 1e-12;
  for (int c = 0; c < 2; ++c) {
    for (auto& v : var[c]) v += eps;
  }
  const std::array<double, 2> prior{count[0] / static_cast<double>(n),
                                    count[1] / static_cast<double>(n)};
  return std::make_unique<GaussianNaiveBayes>(spec, std::move(mean), std::move(var), prior);
}

}  // namespace eegalc::ml
