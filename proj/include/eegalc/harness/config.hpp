#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "eegalc/checksum.hpp"
#include "eegalc/cnn/train.hpp"
#include "eegalc/dsp/config.hpp"
#include "eegalc/features/tensor.hpp"
#include "eegalc/ingest/split.hpp"
#include "eegalc/ingest/trial_store.hpp"
#include "eegalc/ml/classifier.hpp"

namespace eegalc::harness {

enum class SplitMode { trial, subject, given };

constexpr std::string_view to_string(SplitMode m) {
  switch (m) {
    case SplitMode::trial: return "trial";
    case SplitMode::subject: return "subject";
    case SplitMode::given: return "given";
  }
  return "?";
}

inline SplitMode parse_split_mode(std::string_view s) {
  for (auto m : {SplitMode::trial, SplitMode::subject, SplitMode::given}) {
    if (to_string(m) == s) return m;
  }
  fail(ErrorCode::ConfigError, "unknown split mode '" + std::string(s) + "'");
}

struct ExperimentConfig {
  std::string dataset;  // ingested store (has manifest.json) or a directory of source files
  InputFormat input_format = InputFormat::raw;
  std::vector<SplitMode> splits{SplitMode::trial, SplitMode::subject};
  double train_fraction = 0.5;
  GivenSplit given;
  std::uint64_t seed = 0;
  DspConfig dsp;
  std::vector<FeatureKind> feature_kinds{kAllFeatureKinds.begin(), kAllFeatureKinds.end()};
  std::vector<ml::ClassifierSpec> classifiers;
  bool cnn = true;
  cnn::TrainConfig cnn_train;
  double cnn_val_fraction = 0.2;  // carved from the training side for best-epoch selection
  bool save_models = true;
  std::string out = "out";

  void validate() const {
    if (feature_kinds.empty()) fail(ErrorCode::ConfigError, "no feature kinds");
    if (classifiers.empty() && !cnn) fail(ErrorCode::ConfigError, "no models");
    if (splits.empty()) fail(ErrorCode::ConfigError, "no split modes");
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
      fail(ErrorCode::ConfigError, "train_fraction must be in (0,1)");
    }
    if (!(cnn_val_fraction >= 0.0 && cnn_val_fraction < 1.0)) {
      fail(ErrorCode::ConfigError, "cnn_val_fraction must be in [0,1)");
    }
    for (const auto& c : classifiers) c.resolved();
    cnn_train.validate();
  }

  void require_paths() const {
    if (dataset.empty() || !std::filesystem::exists(dataset)) {
      fail(ErrorCode::IoError, "dataset path does not exist: '" + dataset + "'");
    }
  }
};

inline std::vector<ml::ClassifierSpec> default_classifiers() {
  std::vector<ml::ClassifierSpec> out;
  for (auto k : ml::kAllClassifierKinds) out.push_back({k, {}, 0});
  return out;
}

inline nlohmann::json to_json(const ExperimentConfig& c) {
  nlohmann::json splits = nlohmann::json::array();
  for (auto s : c.splits) splits.push_back(to_string(s));
  nlohmann::json kinds = nlohmann::json::array();
  for (auto k : c.feature_kinds) kinds.push_back(to_string(k));
  nlohmann::json models = nlohmann::json::array();
  for (const auto& m : c.classifiers) models.push_back(ml::to_json(m));
  return {{"dataset", c.dataset},
          {"input_format", c.input_format == InputFormat::raw ? "raw" : "long-csv"},
          {"splits", splits},
          {"train_fraction", c.train_fraction},
          {"given", {{"train", c.given.train}, {"test", c.given.test}}},
          {"seed", c.seed},
          {"dsp", to_json(c.dsp)},
          {"feature_kinds", kinds},
          {"classifiers", models},
          {"cnn", c.cnn},
          {"cnn_train", cnn::to_json(c.cnn_train)},
          {"cnn_val_fraction", c.cnn_val_fraction},
          {"save_models", c.save_models},
          {"out", c.out}};
}

inline ExperimentConfig experiment_config_from_json(const nlohmann::json& j) {
  static const std::vector<std::string> known = {
      "dataset", "input_format", "splits", "train_fraction", "given", "seed", "dsp",
      "feature_kinds", "classifiers", "cnn", "cnn_train", "cnn_val_fraction", "save_models", "out"};
  for (const auto& [k, v] : j.items()) {
    if (std::find(known.begin(), known.end(), k) == known.end()) {
      fail(ErrorCode::ConfigError, "unknown config field '" + k + "'");
    }
  }
  ExperimentConfig c;
  c.classifiers = default_classifiers();
  try {
    c.dataset = j.value("dataset", c.dataset);
    if (j.contains("input_format")) c.input_format = parse_input_format(j["input_format"].get<std::string>());
    if (j.contains("splits")) {
      c.splits.clear();
      for (const auto& s : j["splits"]) c.splits.push_back(parse_split_mode(s.get<std::string>()));
    }
    c.train_fraction = j.value("train_fraction", c.train_fraction);
    if (j.contains("given")) {
      c.given.train = j["given"].value("train", std::vector<std::string>{});
      c.given.test = j["given"].value("test", std::vector<std::string>{});
    }
    c.seed = j.value("seed", c.seed);
    if (j.contains("dsp")) c.dsp = dsp_config_from_json(j["dsp"]);
    if (j.contains("feature_kinds")) {
      c.feature_kinds.clear();
      for (const auto& k : j["feature_kinds"]) c.feature_kinds.push_back(parse_feature_kind(k.get<std::string>()));
    }
    if (j.contains("classifiers")) {
      c.classifiers.clear();
      for (const auto& m : j["classifiers"]) c.classifiers.push_back(ml::classifier_spec_from_json(m));
    }
    c.cnn = j.value("cnn", c.cnn);
    if (j.contains("cnn_train")) c.cnn_train = cnn::train_config_from_json(j["cnn_train"]);
    c.cnn_val_fraction = j.value("cnn_val_fraction", c.cnn_val_fraction);
    c.save_models = j.value("save_models", c.save_models);
    c.out = j.value("out", c.out);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ConfigError, e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigError) throw;
    fail(ErrorCode::ConfigError, e.what());
  }
  c.validate();
  return c;
}

inline ExperimentConfig load_experiment_config(const std::filesystem::path& p) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file_bytes(p));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ConfigError, p.string() + ": " + e.what());
  }
  return experiment_config_from_json(j);
}

/// Hash of everything that can change results (the output directory does not).
inline std::string experiment_hash(const ExperimentConfig& c) {
  auto j = to_json(c);
  j.erase("out");
  return sha256_hex(j.dump());
}

}  // namespace eegalc::harness
