#pragma once

#include <array>
#include <cstdio>
#include <string>

#include <nlohmann/json.hpp>

#include "eegalc/ml/cart.hpp"
#include "eegalc/ml/classifier.hpp"
#include "eegalc/ml/forest.hpp"
#include "eegalc/ml/knn.hpp"
#include "eegalc/ml/linear.hpp"
#include "eegalc/ml/naive_bayes.hpp"

namespace eegalc::ml {

inline constexpr int kModelFormatVersion = 1;

struct FitOptions {
  unsigned jobs = 1;
};

/// Deterministic given (spec, train); the model keeps a copy of spec.
inline ClassifierPtr fit(const ClassifierSpec& spec, const LabeledVectors& train,
                         const FitOptions& opts = {}) {
  detail::require_nonempty(train);
  spec.resolved();
  switch (spec.kind) {
    case ClassifierKind::logreg: return fit_logreg(spec, train);
    case ClassifierKind::gnb: return fit_gnb(spec, train);
    case ClassifierKind::knn: return fit_knn(spec, train);
    case ClassifierKind::svm_linear: return fit_linear_svm(spec, train);
    case ClassifierKind::cart: return fit_cart(spec, train);
    case ClassifierKind::random_forest: return fit_random_forest(spec, train, opts.jobs);
  }
  fail(ErrorCode::InvalidArgument, "unknown classifier kind");
}

inline nlohmann::json model_to_json(const Classifier& m) {
  return {{"format", "eegalc-classifier"},
          {"version", kModelFormatVersion},
          {"kind", to_string(m.spec().kind)},
          {"hyperparams", m.spec().resolved()},
          {"seed", m.spec().seed},
          {"dim", m.dim()},
          {"params", m.params()}};
}

inline std::string serialize_model(const Classifier& m) { return model_to_json(m).dump() + "\n"; }

inline ClassifierPtr model_from_json(const nlohmann::json& j) {
  if (j.value("format", std::string()) != "eegalc-classifier") {
    fail(ErrorCode::IoError, "not a classifier model file");
  }
  if (j.value("version", 0) != kModelFormatVersion) {
    fail(ErrorCode::IoError, "unsupported model version");
  }
  const ClassifierSpec spec = classifier_spec_from_json(j);
  const auto dim = j.at("dim").get<std::size_t>();
  const auto& p = j.at("params");
  switch (spec.kind) {
    case ClassifierKind::logreg:
      return std::make_unique<LogisticRegression>(spec, p.at("weights").get<std::vector<double>>(),
                                                  p.at("bias").get<double>());
    case ClassifierKind::svm_linear:
      return std::make_unique<LinearSvm>(spec, p.at("weights").get<std::vector<double>>(),
                                         p.at("bias").get<double>());
    case ClassifierKind::gnb:
      return std::make_unique<GaussianNaiveBayes>(
          spec,
          std::array<std::vector<double>, 2>{p.at("mean0").get<std::vector<double>>(),
                                             p.at("mean1").get<std::vector<double>>()},
          std::array<std::vector<double>, 2>{p.at("var0").get<std::vector<double>>(),
                                             p.at("var1").get<std::vector<double>>()},
          p.at("prior").get<std::array<double, 2>>());
    case ClassifierKind::knn: {
      LabeledVectors lv;
      const auto rows = p.at("rows").get<std::size_t>();
      lv.x = MatrixD(rows, dim);
      lv.x.data() = p.at("x").get<std::vector<double>>();
      lv.y = p.at("y").get<std::vector<int>>();
      lv.validate();
      return std::make_unique<KNearestNeighbors>(spec, std::move(lv), p.at("k").get<std::size_t>());
    }
    case ClassifierKind::cart:
      return std::make_unique<DecisionTree>(spec, dim, TreeNodes::from_json(p));
    case ClassifierKind::random_forest: {
      std::vector<TreeNodes> trees;
      for (const auto& t : p.at("trees")) trees.push_back(TreeNodes::from_json(t));
      return std::make_unique<RandomForest>(spec, dim, std::move(trees));
    }
  }
  fail(ErrorCode::IoError, "unknown classifier kind");
}

inline ClassifierPtr deserialize_model(std::string_view text) {
  return model_from_json(nlohmann::json::parse(text));
}

/// confusion[truth][predicted].
struct FitReport {
  double accuracy = 0.0;
  std::array<std::array<std::size_t, 2>, 2> confusion{};
  double train_accuracy = 0.0;
  ClassifierSpec spec;

  std::size_t total() const {
    return confusion[0][0] + confusion[0][1] + confusion[1][0] + confusion[1][1];
  }
};

inline std::array<std::array<std::size_t, 2>, 2> confusion_of(const Classifier& m,
                                                              const LabeledVectors& d) {
  if (d.dim() != m.dim()) fail(ErrorCode::DimensionMismatch, "test dimension");
  std::array<std::array<std::size_t, 2>, 2> c{};
  for (std::size_t i = 0; i < d.size(); ++i) ++c[d.y[i]][m.predict(d.x.row(i)).label];
  return c;
}

inline double accuracy_of(const std::array<std::array<std::size_t, 2>, 2>& c) {
  const std::size_t total = c[0][0] + c[0][1] + c[1][0] + c[1][1];
  return total == 0 ? 0.0 : static_cast<double>(c[0][0] + c[1][1]) / static_cast<double>(total);
}

/// `train` is optional; when given, train_accuracy is filled in.
inline FitReport evaluate(const Classifier& m, const LabeledVectors& test,
                          const LabeledVectors* train = nullptr) {
  test.validate();
  if (test.size() == 0) fail(ErrorCode::EmptySet, "empty test set");
  FitReport r;
  r.spec = m.spec();
  r.confusion = confusion_of(m, test);
  r.accuracy = accuracy_of(r.confusion);
  if (train != nullptr && train->size() > 0) r.train_accuracy = accuracy_of(confusion_of(m, *train));
  return r;
}

inline nlohmann::json to_json(const FitReport& r) {
  return {{"spec", to_json(r.spec)},
          {"accuracy", r.accuracy},
          {"train_accuracy", r.train_accuracy},
          {"confusion", r.confusion}};
}

inline std::string fit_report_csv_header() {
  return "kind,accuracy,train_accuracy,tn,fp,fn,tp";
}

inline std::string fit_report_csv_row(const FitReport& r) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%s,%.6f,%.6f,%zu,%zu,%zu,%zu", std::string(to_string(r.spec.kind)).c_str(),
                r.accuracy, r.train_accuracy, r.confusion[0][0], r.confusion[0][1],
                r.confusion[1][0], r.confusion[1][1]);
  return buf;
}

}  // namespace eegalc::ml
