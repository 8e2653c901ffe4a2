#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "eegalc/checksum.hpp"
#include "eegalc/cnn/model_io.hpp"
#include "eegalc/cnn/train.hpp"
#include "eegalc/dsp/pca.hpp"
#include "eegalc/features/correlation.hpp"
#include "eegalc/features/group_stats.hpp"
#include "eegalc/features/tensor.hpp"
#include "eegalc/harness/config.hpp"
#include "eegalc/ingest/gzip.hpp"
#include "eegalc/ingest/long_csv.hpp"
#include "eegalc/ingest/trial_text.hpp"
#include "eegalc/ml/models.hpp"

namespace eegalc::harness {

namespace fs = std::filesystem;

using Logger = std::function<void(const std::string&)>;

struct LoadedDataset {
  TrialSet set;
  std::vector<std::pair<std::string, std::string>> checksums;  // (path, sha256)
};

/// Reads an ingested store (directory with manifest.json), a directory of
/// source files, or a single source file.
inline LoadedDataset load_dataset(const fs::path& p, InputFormat format) {
  if (!fs::exists(p)) fail(ErrorCode::IoError, "dataset path does not exist: " + p.string());
  LoadedDataset d;
  if (fs::is_directory(p) && fs::exists(p / "manifest.json")) {
    d.set = read_trial_set(p, true);
    d.checksums.emplace_back("manifest.json", file_sha256(p / "manifest.json"));
    return d;
  }
  if (fs::is_directory(p)) {
    d.set = ingest_directory(p, format);
    std::vector<fs::path> files;
    for (const auto& e : fs::recursive_directory_iterator(p)) {
      if (e.is_regular_file()) files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) d.checksums.emplace_back(fs::relative(f, p).generic_string(), file_sha256(f));
    return d;
  }
  const std::string bytes = maybe_gunzip(read_file_bytes(p));
  if (format == InputFormat::long_csv) {
    d.set = parse_long_csv(bytes, p.filename().string());
  } else {
    d.set = TrialSet({parse_trial_text(std::string_view(bytes))}, {p.filename().string()});
  }
  d.checksums.emplace_back(p.filename().string(), file_sha256(p));
  return d;
}

/// Per-trial PCA artifact removal when the config asks for it.
inline TrialSet preprocess(const TrialSet& set, const DspConfig& dsp) {
  if (!dsp.pca) return set;
  std::vector<Trial> out;
  out.reserve(set.size());
  for (const auto& t : set.trials()) out.push_back(remove_artifacts(t, pca_fit(t), *dsp.pca));
  return TrialSet(std::move(out), set.provenance());
}

inline std::vector<FeatureTensor> build_tensors(const TrialSet& set, FeatureKind kind,
                                                const DspConfig& dsp) {
  std::vector<FeatureTensor> out;
  out.reserve(set.size());
  for (const auto& t : set.trials()) out.push_back(feature_tensor(t, kind, dsp));
  return out;
}

inline SplitPolicy split_policy(const ExperimentConfig& cfg, SplitMode mode) {
  switch (mode) {
    case SplitMode::trial: return RandomSplit{cfg.train_fraction};
    case SplitMode::subject: return SubjectSplit{cfg.train_fraction};
    case SplitMode::given: return cfg.given;
  }
  fail(ErrorCode::ConfigError, "split mode");
}

inline constexpr std::string_view kCnnModelId = "cnn";

struct CellResult {
  std::string split;
  std::string model;
  FeatureKind kind = FeatureKind::raw;
  bool extension = false;  // classical model on a kind other than correlation
  bool ok = false;
  std::string error;
  double accuracy = 0.0;
  double train_accuracy = 0.0;
  std::array<std::array<std::size_t, 2>, 2> confusion{};
  std::uint64_t seed = 0;
  std::string artifact;  // model file stem relative to the output dir
  std::optional<cnn::TrainHistory> history;
  double seconds = 0.0;
};

inline std::string format_percent(double fraction) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%.1f", 100.0 * fraction);
  return buf;
}

struct AccuracyTable {
  std::vector<std::string> splits;
  std::vector<std::string> models;
  std::vector<CellResult> cells;
  std::string config_hash;
  std::uint64_t seed = 0;

  const CellResult* find(std::string_view split, std::string_view model, FeatureKind kind) const {
    for (const auto& c : cells) {
      if (c.split == split && c.model == model && c.kind == kind) return &c;
    }
    return nullptr;
  }

  bool any_failed() const {
    return std::any_of(cells.begin(), cells.end(), [](const CellResult& c) { return !c.ok; });
  }

  /// Rows ordered by split then model, columns by kAllFeatureKinds.
  void sort() {
    auto rank = [](const std::vector<std::string>& v, const std::string& s) {
      return std::find(v.begin(), v.end(), s) - v.begin();
    };
    auto col = [](FeatureKind k) {
      return std::find(kAllFeatureKinds.begin(), kAllFeatureKinds.end(), k) - kAllFeatureKinds.begin();
    };
    std::sort(cells.begin(), cells.end(), [&](const CellResult& a, const CellResult& b) {
      return std::tuple(rank(splits, a.split), rank(models, a.model), col(a.kind)) <
             std::tuple(rank(splits, b.split), rank(models, b.model), col(b.kind));
    });
  }
};

/// Wide CSV: one row per (split, model), one column per feature kind. Empty
/// cells were not run; FAIL marks a cell whose stage raised an error.
inline std::string table_csv(const AccuracyTable& t) {
  std::string out = "split,model";
  for (auto k : kAllFeatureKinds) out += "," + std::string(to_string(k));
  out += "\n";
  for (const auto& s : t.splits) {
    for (const auto& m : t.models) {
      out += s + "," + m;
      for (auto k : kAllFeatureKinds) {
        out += ",";
        if (const auto* c = t.find(s, m, k)) out += c->ok ? format_percent(c->accuracy) : "FAIL";
      }
      out += "\n";
    }
  }
  return out;
}

struct RunManifest {
  std::string config_hash;
  std::vector<std::pair<std::string, std::string>> inputs;
  std::vector<std::pair<std::string, double>> durations;
  std::vector<std::pair<std::string, std::string>> artifacts;  // (relative path, sha256)
};

struct MatrixRun {
  ExperimentConfig config;
  AccuracyTable table;
  RunManifest manifest;
  GroupVoltageStats voltage;
  std::map<Group, CorrelationMatrix> group_correlation;
  CorrelationMatrix pooled_correlation;
  std::optional<Trial> example;  // first preprocessed trial, for band/spectrum plots
};

namespace detail {

/// Runs fn(i) for i in [0, n) on up to `jobs` threads.
inline void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& fn) {
  if (jobs <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < std::min<std::size_t>(jobs, n); ++t) {
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < n;) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

inline std::uint64_t cell_seed(std::uint64_t base, std::size_t split, FeatureKind kind, std::size_t model) {
  return derive_seed(derive_seed(derive_seed(base, split), static_cast<std::uint64_t>(kind)), model);
}

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline std::vector<int> labels_of(const std::vector<FeatureTensor>& ts) {
  std::vector<int> y;
  for (const auto& t : ts) y.push_back(static_cast<int>(t.label));
  return y;
}

inline std::vector<FeatureTensor> pick(const std::vector<FeatureTensor>& ts,
                                       const std::vector<std::size_t>& idx) {
  std::vector<FeatureTensor> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(ts[i]);
  return out;
}

struct KindInputs {
  const TrialSet* train_trials;
  const std::vector<FeatureTensor>* train;
  const std::vector<FeatureTensor>* test;
  std::optional<ml::LabeledVectors> train_vec, test_vec;
};

inline void run_cnn_cell(const ExperimentConfig& cfg, const KindInputs& in, std::uint64_t seed,
                         const fs::path& stem, CellResult& cell) {
  // Validation trials for best-epoch selection come from the training side only.
  std::vector<FeatureTensor> fit_part = *in.train, val_part;
  if (cfg.cnn_val_fraction > 0.0) {
    try {
      const auto s = split_dataset(*in.train_trials, RandomSplit{1.0 - cfg.cnn_val_fraction},
                                   derive_seed(seed, 0x76616cULL));
      if (!s.test_indices.empty() && s.train.class_counts().size() == 2) {
        fit_part = pick(*in.train, s.train_indices);
        val_part = pick(*in.train, s.test_indices);
      }
    } catch (const Error&) {
      // Too few trials to hold out a stratified validation set.
    }
  }
  const auto train_ds = cnn::dataset_from_tensors(fit_part);
  const auto val_ds = val_part.empty() ? train_ds : cnn::dataset_from_tensors(val_part);
  const auto test_ds = cnn::dataset_from_tensors(*in.test);

  auto tc = cfg.cnn_train;
  tc.seed = seed;
  auto model = cnn::build_default(train_ds.x.shape, seed);
  auto res = cnn::train(model, train_ds, val_ds, tc);

  const auto pred = cnn::predict_labels(res.model, test_ds);
  for (std::size_t i = 0; i < pred.size(); ++i) ++cell.confusion[test_ds.y[i]][pred[i]];
  cell.accuracy = ml::accuracy_of(cell.confusion);
  cell.train_accuracy = cnn::accuracy(res.model, cnn::dataset_from_tensors(*in.train));
  cell.history = res.history;
  if (cfg.save_models) {
    cnn::save_model(res.model, stem);
    write_file_bytes(stem.string() + ".history.csv", cnn::history_csv(res.history));
  }
}

inline void run_classic_cell(const ml::ClassifierSpec& base, const KindInputs& in, std::uint64_t seed,
                             bool save, const fs::path& stem, CellResult& cell) {
  auto spec = base;
  spec.seed = seed;
  const auto model = ml::fit(spec, *in.train_vec);
  const auto rep = ml::evaluate(*model, *in.test_vec, &*in.train_vec);
  cell.confusion = rep.confusion;
  cell.accuracy = rep.accuracy;
  cell.train_accuracy = rep.train_accuracy;
  if (save) write_file_bytes(stem.string() + ".json", ml::serialize_model(*model));
}

inline nlohmann::json cell_report_json(const CellResult& c) {
  return {{"split", c.split},
          {"model", c.model},
          {"feature_kind", to_string(c.kind)},
          {"extension", c.extension},
          {"ok", c.ok},
          {"error", c.error},
          {"accuracy", c.accuracy},
          {"accuracy_percent", c.ok ? format_percent(c.accuracy) : ""},
          {"train_accuracy", c.train_accuracy},
          {"confusion", c.confusion},
          {"seed", c.seed},
          {"artifact", c.artifact}};
}

}  // namespace detail

/// Group statistics and correlation summaries used by the report. Voltage
/// statistics use the data as recorded; correlations use the preprocessed set.
inline void summarize_dataset(const TrialSet& recorded, const TrialSet& preprocessed, MatrixRun& run) {
  run.voltage = group_voltage_stats(recorded);
  for (Group g : {Group::control, Group::alcoholic}) {
    run.group_correlation[g] = mean_correlation(preprocessed, g);
  }
  MatrixD pooled(kChannels, kChannels, 0.0);
  for (const auto& t : preprocessed.trials()) {
    const auto c = pearson_rows(t.data);
    for (std::size_t i = 0; i < pooled.size(); ++i) pooled.data()[i] += c.data()[i];
  }
  for (auto& v : pooled.data()) v /= static_cast<double>(preprocessed.size());
  run.pooled_correlation = {pooled, &ElectrodeMap::standard()};
  if (preprocessed.size() > 0) run.example = preprocessed[0];
}

/// Rebuilds the accuracy table from a results.json written by emit_report.
inline AccuracyTable table_from_results(const nlohmann::json& j) {
  AccuracyTable t;
  try {
    t.config_hash = j.at("config_hash").get<std::string>();
    t.seed = j.at("seed").get<std::uint64_t>();
    t.splits = j.at("splits").get<std::vector<std::string>>();
    t.models = j.at("models").get<std::vector<std::string>>();
    for (const auto& c : j.at("cells")) {
      CellResult r;
      r.split = c.at("split").get<std::string>();
      r.model = c.at("model").get<std::string>();
      r.kind = parse_feature_kind(c.at("feature_kind").get<std::string>());
      r.extension = c.at("extension").get<bool>();
      r.ok = c.at("ok").get<bool>();
      r.error = c.at("error").get<std::string>();
      r.accuracy = c.at("accuracy").get<double>();
      r.train_accuracy = c.at("train_accuracy").get<double>();
      r.confusion = c.at("confusion").get<std::array<std::array<std::size_t, 2>, 2>>();
      r.seed = c.at("seed").get<std::uint64_t>();
      r.artifact = c.at("artifact").get<std::string>();
      t.cells.push_back(std::move(r));
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::SchemaMismatch, std::string("results.json: ") + e.what());
  }
  t.sort();
  return t;
}

struct RunOptions {
  unsigned jobs = 1;
  Logger log;
};

/// Fits every (split, feature kind, model) cell. A failing cell is recorded
/// with its error and the run continues. Model files and per-cell reports are
/// written under cfg.out/models as they complete.
inline MatrixRun run_matrix(const ExperimentConfig& cfg, const RunOptions& opts = {}) {
  using clock = std::chrono::steady_clock;
  cfg.validate();
  cfg.require_paths();
  auto log = [&](const std::string& s) {
    if (opts.log) opts.log(s);
  };

  MatrixRun run;
  run.config = cfg;
  const fs::path out(cfg.out);
  run.manifest.config_hash = experiment_hash(cfg);
  run.table.config_hash = run.manifest.config_hash;
  run.table.seed = cfg.seed;

  auto t0 = clock::now();
  auto data = load_dataset(cfg.dataset, cfg.input_format);
  run.manifest.inputs = data.checksums;
  run.manifest.durations.emplace_back("ingest", detail::seconds_since(t0));
  log("loaded " + std::to_string(data.set.size()) + " trials");

  t0 = clock::now();
  const TrialSet set = preprocess(data.set, cfg.dsp);
  summarize_dataset(data.set, set, run);
  data.set = TrialSet();
  run.manifest.durations.emplace_back("preprocess", detail::seconds_since(t0));

  auto& table = run.table;
  if (cfg.cnn) table.models.emplace_back(kCnnModelId);
  std::vector<std::string> classic_ids;
  for (const auto& c : cfg.classifiers) {
    std::string id = c.name();
    for (int n = 2; std::find(table.models.begin(), table.models.end(), id) != table.models.end(); ++n) {
      id = c.name() + "_" + std::to_string(n);
    }
    table.models.push_back(id);
    classic_ids.push_back(id);
  }

  for (std::size_t si = 0; si < cfg.splits.size(); ++si) {
    const std::string split_name(to_string(cfg.splits[si]));
    table.splits.push_back(split_name);
    t0 = clock::now();
    const auto split = split_dataset(set, split_policy(cfg, cfg.splits[si]), derive_seed(cfg.seed, si));
    run.manifest.durations.emplace_back("split/" + split_name, detail::seconds_since(t0));
    log(split_name + " split: " + std::to_string(split.train.size()) + " train, " +
        std::to_string(split.test.size()) + " test");

    for (auto kind : cfg.feature_kinds) {
      const std::string kname(to_string(kind));
      t0 = clock::now();
      const auto train_t = build_tensors(split.train, kind, cfg.dsp);
      const auto test_t = build_tensors(split.test, kind, cfg.dsp);
      detail::KindInputs in{&split.train, &train_t, &test_t, std::nullopt, std::nullopt};
      if (!cfg.classifiers.empty()) {
        in.train_vec = ml::from_tensors(train_t);
        in.test_vec = ml::from_tensors(test_t);
      }
      run.manifest.durations.emplace_back("features/" + split_name + "/" + kname, detail::seconds_since(t0));

      const fs::path dir = out / "models" / split_name / kname;
      std::vector<CellResult> cells(table.models.size());
      detail::parallel_for(cells.size(), opts.jobs, [&](std::size_t mi) {
        auto& cell = cells[mi];
        cell.split = split_name;
        cell.model = table.models[mi];
        cell.kind = kind;
        cell.seed = detail::cell_seed(cfg.seed, si, kind, mi);
        cell.artifact = (fs::path("models") / split_name / kname / cell.model).generic_string();
        const bool is_cnn = cfg.cnn && mi == 0;
        cell.extension = !is_cnn && kind != FeatureKind::correlation;
        const auto start = clock::now();
        try {
          if (cfg.save_models) fs::create_directories(dir);
          if (is_cnn) {
            detail::run_cnn_cell(cfg, in, cell.seed, dir / cell.model, cell);
          } else {
            detail::run_classic_cell(cfg.classifiers[mi - (cfg.cnn ? 1 : 0)], in, cell.seed,
                                     cfg.save_models, dir / cell.model, cell);
          }
          cell.ok = true;
        } catch (const std::exception& e) {
          cell.ok = false;
          cell.error = e.what();
        }
        cell.seconds = detail::seconds_since(start);
        if (cfg.save_models) {
          write_file_bytes(dir / (cell.model + ".report.json"), detail::cell_report_json(cell).dump(2) + "\n");
        }
      });
      for (auto& c : cells) {
        log(split_name + " " + kname + " " + c.model + ": " +
            (c.ok ? format_percent(c.accuracy) + "%" : "FAILED (" + c.error + ")"));
        run.manifest.durations.emplace_back("cell/" + split_name + "/" + kname + "/" + c.model, c.seconds);
        table.cells.push_back(std::move(c));
      }
    }
  }
  table.sort();
  return run;
}

}  // namespace eegalc::harness
