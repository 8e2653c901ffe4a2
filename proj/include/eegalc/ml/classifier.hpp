#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "eegalc/error.hpp"
#include "eegalc/ml/dataset.hpp"

namespace eegalc::ml {

enum class ClassifierKind { logreg, gnb, knn, svm_linear, cart, random_forest };

inline constexpr std::array<ClassifierKind, 6> kAllClassifierKinds = {
    ClassifierKind::logreg, ClassifierKind::gnb,  ClassifierKind::knn,
    ClassifierKind::svm_linear, ClassifierKind::cart, ClassifierKind::random_forest};

constexpr std::string_view to_string(ClassifierKind k) {
  switch (k) {
    case ClassifierKind::logreg: return "logreg";
    case ClassifierKind::gnb: return "gnb";
    case ClassifierKind::knn: return "knn";
    case ClassifierKind::svm_linear: return "svm_linear";
    case ClassifierKind::cart: return "cart";
    case ClassifierKind::random_forest: return "random_forest";
  }
  return "?";
}

inline ClassifierKind parse_classifier_kind(std::string_view s) {
  for (auto k : kAllClassifierKinds) {
    if (to_string(k) == s) return k;
  }
  fail(ErrorCode::InvalidArgument, "unknown classifier '" + std::string(s) + "'");
}

using Hyperparams = std::map<std::string, double>;

/// Conventional defaults; user-supplied entries override them.
inline Hyperparams default_hyperparams(ClassifierKind k) {
  switch (k) {
    case ClassifierKind::logreg: return {{"learning_rate", 0.1}, {"epochs", 500}, {"l2", 1e-4}};
    case ClassifierKind::gnb: return {{"var_smoothing", 1e-9}};
    case ClassifierKind::knn: return {{"k", 5}};
    case ClassifierKind::svm_linear: return {{"C", 1.0}, {"learning_rate", 0.1}, {"epochs", 500}};
    case ClassifierKind::cart: return {{"max_depth", 12}, {"min_leaf", 2}};
    case ClassifierKind::random_forest:
      // max_features 0 means floor(sqrt(d)).
      return {{"trees", 100}, {"max_features", 0}, {"bootstrap", 1}, {"max_depth", 64},
              {"min_leaf", 1}};
  }
  return {};
}

struct ClassifierSpec {
  ClassifierKind kind = ClassifierKind::cart;
  Hyperparams hyperparams;
  std::uint64_t seed = 0;

  double param(const std::string& name) const {
    auto it = hyperparams.find(name);
    if (it != hyperparams.end()) return it->second;
    const auto d = default_hyperparams(kind);
    auto jt = d.find(name);
    if (jt == d.end()) fail(ErrorCode::InvalidHyperparam, "no hyperparameter '" + name + "'");
    return jt->second;
  }

  /// Defaults merged with overrides; unknown names are rejected.
  Hyperparams resolved() const {
    auto out = default_hyperparams(kind);
    for (const auto& [k, v] : hyperparams) {
      if (!out.count(k)) {
        fail(ErrorCode::InvalidHyperparam,
             "'" + k + "' is not a " + std::string(to_string(kind)) + " hyperparameter");
      }
      out[k] = v;
    }
    return out;
  }

  std::string name() const { return std::string(to_string(kind)); }
};

inline nlohmann::json to_json(const ClassifierSpec& s) {
  return {{"kind", to_string(s.kind)}, {"hyperparams", s.resolved()}, {"seed", s.seed}};
}

inline ClassifierSpec classifier_spec_from_json(const nlohmann::json& j) {
  ClassifierSpec s;
  s.kind = parse_classifier_kind(j.at("kind").get<std::string>());
  if (j.contains("hyperparams")) s.hyperparams = j["hyperparams"].get<Hyperparams>();
  s.seed = j.value("seed", std::uint64_t{0});
  s.resolved();
  return s;
}

/// label in {0,1}; score is the class-1 probability for logreg/gnb/knn/cart/
/// random_forest and the signed margin for svm_linear.
struct Prediction {
  int label = 0;
  double score = 0.0;
};

class Classifier {
 public:
  explicit Classifier(ClassifierSpec spec, std::size_t dim) : spec_(std::move(spec)), dim_(dim) {}
  virtual ~Classifier() = default;

  const ClassifierSpec& spec() const { return spec_; }
  std::size_t dim() const { return dim_; }

  Prediction predict(std::span<const double> x) const {
    if (x.size() != dim_) {
      fail(ErrorCode::DimensionMismatch,
           "expected " + std::to_string(dim_) + " features, got " + std::to_string(x.size()));
    }
    return predict_unchecked(x);
  }

  /// Learned parameters as flat numeric arrays.
  virtual nlohmann::json params() const = 0;

 protected:
  virtual Prediction predict_unchecked(std::span<const double> x) const = 0;

 private:
  ClassifierSpec spec_;
  std::size_t dim_;
};

using ClassifierPtr = std::unique_ptr<Classifier>;

namespace detail {

inline void require_nonempty(const LabeledVectors& d) {
  d.validate();
  if (d.size() == 0) fail(ErrorCode::EmptySet, "empty training set");
}

inline void require_two_classes(const LabeledVectors& d, ClassifierKind k) {
  if (d.count(0) == 0 || d.count(1) == 0) {
    fail(ErrorCode::SingleClassTrain, std::string(to_string(k)) + " needs both classes");
  }
}

inline double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

inline int positive_int(const ClassifierSpec& s, const std::string& name, int min = 1) {
  const double v = s.param(name);
  if (!(v >= min) || v != std::floor(v)) {
    fail(ErrorCode::InvalidHyperparam, name + " must be an integer >= " + std::to_string(min));
  }
  return static_cast<int>(v);
}

inline double positive(const ClassifierSpec& s, const std::string& name, bool allow_zero = false) {
  const double v = s.param(name);
  if (!(allow_zero ? v >= 0 : v > 0) || !std::isfinite(v)) {
    fail(ErrorCode::InvalidHyperparam, name + " out of range");
  }
  return v;
}

}  // namespace detail

}  // namespace eegalc::ml
