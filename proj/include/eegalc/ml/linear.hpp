#pragma once

#include <cmath>
#include <vector>

#include "eegalc/ml/classifier.hpp"

namespace eegalc::ml {

class LinearModel : public Classifier {
 public:
  LinearModel(ClassifierSpec spec, std::vector<double> w, double b)
      : Classifier(std::move(spec), w.size()), w_(std::move(w)), b_(b) {}

  const std::vector<double>& weights() const { return w_; }
  double bias() const { return b_; }

  double margin(std::span<const double> x) const {
    double z = b_;
    for (std::size_t i = 0; i < w_.size(); ++i) z += w_[i] * x[i];
    return z;
  }

  nlohmann::json params() const override { return {{"weights", w_}, {"bias", b_}}; }

 private:
  std::vector<double> w_;
  double b_;
};

/// Sigmoid output; score is P(class 1).
class LogisticRegression final : public LinearModel {
 public:
  using LinearModel::LinearModel;

 protected:
  Prediction predict_unchecked(std::span<const double> x) const override {
    const double p = detail::sigmoid(margin(x));
    return {p > 0.5 ? 1 : 0, p};
  }
};

/// Score is the signed margin w.x + b.
class LinearSvm final : public LinearModel {
 public:
  using LinearModel::LinearModel;

 protected:
  Prediction predict_unchecked(std::span<const double> x) const override {
    const double m = margin(x);
    return {m > 0.0 ? 1 : 0, m};
  }
};

/// Full-batch gradient descent on mean log-loss + (l2/2)|w|^2, zero init.
inline ClassifierPtr fit_logreg(const ClassifierSpec& spec, const LabeledVectors& d) {
  detail::require_two_classes(d, spec.kind);
  const double rate = detail::positive(spec, "learning_rate", true);
  const int epochs = detail::positive_int(spec, "epochs", 0);
  const double l2 = detail::positive(spec, "l2", true);
  const std::size_t n = d.size(), dim = d.dim();
  std::vector<double> w(dim, 0.0), grad(dim);
  double b = 0.0;
  for (int e = 0; e < epochs; ++e) {
    std::fill(grad.begin(), grad.end(), 0.0);
    double gb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto x = d.x.row(i);
      double z = b;
      for (std::size_t j = 0; j < dim; ++j) z += w[j] * x[j];
      const double r = detail::sigmoid(z) - d.y[i];
      for (std::size_t j = 0; j < dim; ++j) grad[j] += r * x[j];
      gb += r;
    }
    const double inv = 1.0 / static_cast<double>(n);
    for (std::size_t j = 0; j < dim; ++j) w[j] -= rate * (grad[j] * inv + l2 * w[j]);
    b -= rate * gb * inv;
  }
  return std::make_unique<LogisticRegression>(spec, std::move(w), b);
}

/// Full-batch subgradient descent on (lambda/2)|w|^2 + mean hinge loss with
/// lambda = 1/(C n) and step learning_rate / sqrt(t). Trains on mean-centred
/// features so the bias starts near its optimum, then folds the mean back in.
inline ClassifierPtr fit_linear_svm(const ClassifierSpec& spec, const LabeledVectors& d) {
  detail::require_two_classes(d, spec.kind);
  const double c = detail::positive(spec, "C");
  const double rate = detail::positive(spec, "learning_rate", true);
  const int epochs = detail::positive_int(spec, "epochs", 0);
  const std::size_t n = d.size(), dim = d.dim();
  const double lambda = 1.0 / (c * static_cast<double>(n));
  std::vector<double> mu(dim, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto x = d.x.row(i);
    for (std::size_t j = 0; j < dim; ++j) mu[j] += x[j];
  }
  for (auto& v : mu) v /= static_cast<double>(n);
  std::vector<double> w(dim, 0.0), grad(dim);
  double b = 0.0;
  for (int e = 0; e < epochs; ++e) {
    std::fill(grad.begin(), grad.end(), 0.0);
    double gb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto x = d.x.row(i);
      const double y = d.y[i] == 1 ? 1.0 : -1.0;
      double z = b;
      for (std::size_t j = 0; j < dim; ++j) z += w[j] * (x[j] - mu[j]);
      if (y * z < 1.0) {
        for (std::size_t j = 0; j < dim; ++j) grad[j] -= y * (x[j] - mu[j]);
        gb -= y;
      }
    }
    const double step = rate / std::sqrt(static_cast<double>(e + 1));
    const double inv = 1.0 / static_cast<double>(n);
    for (std::size_t j = 0; j < dim; ++j) w[j] -= step * (grad[j] * inv + lambda * w[j]);
    b -= step * gb * inv;
  }
  for (std::size_t j = 0; j < dim; ++j) b -= w[j] * mu[j];
  return std::make_unique<LinearSvm>(spec, std::move(w), b);
}

}  // namespace eegalc::ml
