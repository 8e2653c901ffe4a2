// eegalc command-line front end. Exit codes: 0 ok, 1 stage/check failure, 2 usage.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "eegalc.hpp"

namespace fs = std::filesystem;
using namespace eegalc;
using harness::ExperimentConfig;

namespace {

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  unsigned jobs = 1;
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

ExperimentConfig resolve_config(const Globals& g) {
  ExperimentConfig c;
  c.classifiers = harness::default_classifiers();
  if (!g.config.empty()) c = harness::load_experiment_config(g.config);
  if (g.seed) c.seed = *g.seed;
  if (!g.out.empty()) c.out = g.out;
  return c;
}

fs::path require_out(const Globals& g, const char* what) {
  if (g.out.empty()) throw UsageError(std::string(what) + " needs --out");
  return g.out;
}

void log_line(const std::string& s) { std::cerr << s << "\n"; }

std::string counts(const TrialSet& set) {
  const auto c = set.class_counts();
  auto get = [&](Group g) { return c.count(g) ? c.at(g) : 0; };
  return std::to_string(set.size()) + " trials (" + std::to_string(get(Group::alcoholic)) + " alcoholic, " +
         std::to_string(get(Group::control)) + " control)";
}

TrialSet load(const std::string& input, InputFormat format) {
  return harness::load_dataset(input, format).set;
}

std::optional<ml::ClassifierKind> classic_kind(const std::string& model) {
  if (model == harness::kCnnModelId) return std::nullopt;
  return ml::parse_classifier_kind(model);
}

ml::ClassifierSpec spec_for(const ExperimentConfig& cfg, ml::ClassifierKind kind,
                            const std::vector<std::string>& params) {
  ml::ClassifierSpec spec{kind, {}, cfg.seed};
  for (const auto& c : cfg.classifiers) {
    if (c.kind == kind) spec.hyperparams = c.hyperparams;
  }
  for (const auto& p : params) {
    const auto eq = p.find('=');
    if (eq == std::string::npos) throw UsageError("--param expects name=value, got '" + p + "'");
    try {
      spec.hyperparams[p.substr(0, eq)] = std::stod(p.substr(eq + 1));
    } catch (const std::exception&) {
      throw UsageError("--param value is not a number: '" + p + "'");
    }
  }
  spec.resolved();
  return spec;
}

harness::SplitMode split_mode_of(const ExperimentConfig& cfg, const std::string& flag) {
  if (!flag.empty()) return harness::parse_split_mode(flag);
  return cfg.splits.front();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"EEG alcoholism classification toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config, "experiment config (JSON)");
  app.add_option("--seed", g.seed, "base seed (overrides the config)");
  app.add_option("--out", g.out, "output directory");
  app.add_option("--jobs", g.jobs, "worker threads")->check(CLI::Range(1u, 256u));

  std::string input, format = "raw", kind_flag, model_flag, split_flag, side = "test", results;
  std::vector<std::string> kinds, params;
  std::string pca_flag;
  int pca_k = 1;
  double pca_threshold = 0.5, train_fraction = -1.0;
  int export_trial = -1, heatmaps = 0;
  bool fault_fft = false, skip_cnn = false;

  auto* ingest = app.add_subcommand("ingest", "parse raw trial files or long CSV into a trial store");
  ingest->add_option("--in,--input", input, "file or directory")->required();
  ingest->add_option("--format", format, "raw | long-csv");
  bool gunzip = false;
  ingest->add_flag("--gunzip", gunzip, "accepted for compatibility; gzip input is detected automatically");

  auto* pre = app.add_subcommand("preprocess", "PCA artifact removal; optional band/spectrum export");
  pre->add_option("--in,--input", input, "trial store or source files")->required();
  pre->add_option("--format", format, "raw | long-csv (source files only)");
  pre->add_option("--pca", pca_flag, "none | drop_top_k | frontal_loading (default: config)");
  pre->add_option("--k", pca_k, "components for drop_top_k");
  pre->add_option("--threshold", pca_threshold, "frontal loading threshold");
  pre->add_option("--export-trial", export_trial, "write band and spectrum CSVs for this trial index");

  auto* feat = app.add_subcommand("features", "build feature tensors");
  feat->add_option("--in,--input", input, "trial store or source files")->required();
  feat->add_option("--format", format, "raw | long-csv (source files only)");
  feat->add_option("--kind", kinds, "feature kind(s); default all");
  feat->add_option("--heatmaps", heatmaps, "render SVG heatmaps for the first N trials per kind");

  auto* train = app.add_subcommand("train", "fit one model on the training side of a split");
  train->add_option("--in,--input", input, "trial store or source files")->required();
  train->add_option("--format", format, "raw | long-csv (source files only)");
  train->add_option("--kind", kind_flag, "feature kind")->required();
  train->add_option("--model", model_flag, "cnn | logreg | gnb | knn | svm_linear | cart | random_forest")->required();
  train->add_option("--split", split_flag, "trial | subject | given (default: first config split)");
  train->add_option("--train-fraction", train_fraction, "override the config train fraction");
  train->add_option("--param", params, "hyperparameter override name=value (classical models)");

  auto* eval = app.add_subcommand("evaluate", "score a saved model on a split side");
  eval->add_option("--model", model_flag, "model file (.json)")->required();
  eval->add_option("--in,--input", input, "trial store or source files")->required();
  eval->add_option("--format", format, "raw | long-csv (source files only)");
  eval->add_option("--kind", kind_flag, "feature kind")->required();
  eval->add_option("--split", split_flag, "trial | subject | given");
  eval->add_option("--train-fraction", train_fraction, "override the config train fraction");
  eval->add_option("--side", side, "test | train | all");

  auto* report = app.add_subcommand("report", "render tables and plots");
  report->add_option("--in,--input", input, "dataset (default: config dataset)");
  report->add_option("--format", format, "raw | long-csv (source files only)");
  report->add_option("--results", results, "results.json from run-matrix");

  auto* verify = app.add_subcommand("verify", "run the oracle suite on synthetic inputs");
  verify->add_flag("--fault-fft", fault_fft, "flip the FFT kernel sign to exercise the oracle");
  verify->add_flag("--skip-cnn", skip_cnn, "skip gradient check and overfit drill");

  auto* matrix = app.add_subcommand("run-matrix", "fit every feature kind x model cell and report");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    const auto fmt = parse_input_format(format);

    if (*ingest) {
      const auto out = require_out(g, "ingest");
      const auto set = load(input, fmt);
      write_trial_set(set, out);
      std::cout << "ingested " << counts(set) << " -> " << out.string() << "\n";
      return 0;
    }

    if (*pre) {
      const auto out = require_out(g, "preprocess");
      auto cfg = resolve_config(g);
      if (!pca_flag.empty()) {
        nlohmann::json pj = {{"policy", pca_flag}, {"k", pca_k}, {"threshold", pca_threshold}};
        cfg.dsp.pca = removal_policy_from_json(pj);
      }
      const auto set = harness::preprocess(load(input, fmt), cfg.dsp);
      write_trial_set(set, out);
      write_file_bytes(out / "dsp_config.json", to_json(cfg.dsp).dump(2) + "\n");
      if (export_trial >= 0) {
        if (static_cast<std::size_t>(export_trial) >= set.size()) {
          fail(ErrorCode::IndexOutOfRange, "--export-trial " + std::to_string(export_trial));
        }
        const auto& t = set[static_cast<std::size_t>(export_trial)];
        for (std::size_t c = 0; c < kChannels; ++c) {
          const std::string name(electrode_name(c + 1));
          const auto row = t.data.row(c);
          write_file_bytes(out / "bands" / (name + ".csv"),
                           bands_to_csv(band_decompose(row, t.sample_rate, cfg.dsp.band_method), t.sample_rate));
          write_file_bytes(out / "spectrum" / (name + ".csv"), spectrum_to_csv(dft(row, t.sample_rate)));
        }
      }
      std::cout << "preprocessed " << counts(set) << " -> " << out.string() << "\n";
      return 0;
    }

    if (*feat) {
      const auto out = require_out(g, "features");
      const auto cfg = resolve_config(g);
      const auto set = load(input, fmt);
      std::vector<FeatureKind> ks;
      for (const auto& k : kinds) ks.push_back(parse_feature_kind(k));
      if (ks.empty()) ks.assign(kAllFeatureKinds.begin(), kAllFeatureKinds.end());
      const std::string hash = config_hash(cfg.dsp);
      for (auto k : ks) {
        const std::string kname(to_string(k));
        for (std::size_t i = 0; i < set.size(); ++i) {
          const auto ft = feature_tensor(set[i], k, cfg.dsp);
          char stem[16];
          std::snprintf(stem, sizeof stem, "%05zu", i);
          save_feature_tensor(ft, out / kname / stem, set.provenance()[i], hash);
          if (static_cast<int>(i) < heatmaps) {
            render_heatmap(ft, out / kname / (std::string(stem) + ".svg"),
                           kname + " " + set[i].subject_id + " (" + std::string(to_string(set[i].group)) + ")");
          }
        }
        std::cout << kname << ": " << set.size() << " tensors\n";
      }
      return 0;
    }

    if (*train || *eval) {
      auto cfg = resolve_config(g);
      if (train_fraction > 0.0) cfg.train_fraction = train_fraction;
      const auto kind = parse_feature_kind(kind_flag);
      const auto set = harness::preprocess(load(input, fmt), cfg.dsp);
      const auto split = split_dataset(set, harness::split_policy(cfg, split_mode_of(cfg, split_flag)),
                                       derive_seed(cfg.seed, 0));
      const auto train_t = harness::build_tensors(split.train, kind, cfg.dsp);

      if (*train) {
        const auto out = require_out(g, "train");
        fs::create_directories(out);
        const auto ck = classic_kind(model_flag);
        const auto test_t = harness::build_tensors(split.test, kind, cfg.dsp);
        if (!ck) {
          harness::ExperimentConfig one = cfg;
          one.save_models = true;
          harness::detail::KindInputs in{&split.train, &train_t, &test_t, std::nullopt, std::nullopt};
          harness::CellResult cell;
          cell.seed = cfg.seed;
          harness::detail::run_cnn_cell(one, in, cfg.seed, out / "cnn", cell);
          std::cout << "cnn " << to_string(kind) << ": test accuracy " << harness::format_percent(cell.accuracy)
                    << "% (best epoch " << cell.history->best_epoch + 1 << " of " << cell.history->epochs.size()
                    << ")\n";
          write_file_bytes(out / "cnn.report.json", harness::detail::cell_report_json(cell).dump(2) + "\n");
          return 0;
        }
        const auto spec = spec_for(cfg, *ck, params);
        const auto tr = ml::from_tensors(train_t);
        const auto te = ml::from_tensors(test_t);
        const auto model = ml::fit(spec, tr, {g.jobs});
        const auto rep = ml::evaluate(*model, te, &tr);
        write_file_bytes(out / (model_flag + ".json"), ml::serialize_model(*model));
        write_file_bytes(out / (model_flag + ".report.json"), ml::to_json(rep).dump(2) + "\n");
        std::cout << ml::fit_report_csv_header() << "\n" << ml::fit_report_csv_row(rep) << "\n";
        return 0;
      }

      // evaluate
      std::vector<FeatureTensor> tensors;
      if (side == "train") {
        tensors = train_t;
      } else if (side == "test") {
        tensors = harness::build_tensors(split.test, kind, cfg.dsp);
      } else if (side == "all") {
        tensors = harness::build_tensors(set, kind, cfg.dsp);
      } else {
        throw UsageError("--side must be test, train or all");
      }
      const auto text = read_file_bytes(model_flag);
      const auto j = nlohmann::json::parse(text);
      std::array<std::array<std::size_t, 2>, 2> confusion{};
      std::string model_kind;
      if (j.value("format", std::string()) == "eegalc-cnn") {
        fs::path stem(model_flag);
        stem.replace_extension();
        auto m = cnn::load_model(stem);
        const auto d = cnn::dataset_from_tensors(tensors);
        const auto pred = cnn::predict_labels(m, d);
        for (std::size_t i = 0; i < pred.size(); ++i) ++confusion[d.y[i]][pred[i]];
        model_kind = "cnn";
      } else {
        const auto m = ml::deserialize_model(text);
        confusion = ml::confusion_of(*m, ml::from_tensors(tensors));
        model_kind = std::string(ml::to_string(m->spec().kind));
      }
      const double acc = ml::accuracy_of(confusion);
      const nlohmann::json rep = {{"model", model_kind}, {"feature_kind", to_string(kind)}, {"side", side},
                                  {"accuracy", acc}, {"confusion", confusion}};
      if (!g.out.empty()) write_file_bytes(fs::path(g.out) / "evaluation.json", rep.dump(2) + "\n");
      std::printf("%s,%s,%s,%.6f,%zu,%zu,%zu,%zu\n", model_kind.c_str(), std::string(to_string(kind)).c_str(),
                  side.c_str(), acc, confusion[0][0], confusion[0][1], confusion[1][0], confusion[1][1]);
      return 0;
    }

    if (*report) {
      auto cfg = resolve_config(g);
      const auto out = require_out(g, "report");
      if (!input.empty()) cfg.dataset = input;
      cfg.require_paths();
      harness::MatrixRun run;
      run.config = cfg;
      const auto data = harness::load_dataset(cfg.dataset, fmt);
      harness::summarize_dataset(data.set, harness::preprocess(data.set, cfg.dsp), run);
      run.manifest.inputs = data.checksums;
      run.manifest.config_hash = harness::experiment_hash(cfg);
      if (!results.empty()) {
        run.table = harness::table_from_results(nlohmann::json::parse(read_file_bytes(results)));
      } else {
        run.table.config_hash = run.manifest.config_hash;
        run.table.seed = cfg.seed;
      }
      harness::emit_report(run, out);
      std::cout << "report -> " << out.string() << "\n";
      return 0;
    }

    if (*verify) {
      harness::VerifyOptions o;
      o.seed = g.seed.value_or(0);
      o.fault_fft_sign_flip = fault_fft;
      o.include_cnn = !skip_cnn;
      const auto checks = harness::run_verify(o, [](const harness::VerifyCheck& c) {
        std::cout << harness::format_check(c) << std::endl;
      });
      bool ok = true;
      nlohmann::json j = nlohmann::json::array();
      for (const auto& c : checks) {
        ok = ok && c.passed;
        j.push_back(harness::to_json(c));
      }
      if (!g.out.empty()) write_file_bytes(fs::path(g.out) / "verify.json", j.dump(2) + "\n");
      std::cout << (ok ? "all checks passed" : "some checks FAILED") << "\n";
      return ok ? 0 : 1;
    }

    if (*matrix) {
      if (g.config.empty()) throw UsageError("run-matrix needs --config");
      const auto cfg = resolve_config(g);
      harness::RunOptions ro;
      ro.jobs = g.jobs;
      ro.log = log_line;
      const auto run = harness::run_matrix(cfg, ro);
      harness::emit_report(run, cfg.out);
      std::cout << harness::table_csv(run.table);
      if (run.table.any_failed()) {
        std::cerr << "one or more cells failed; see results.json\n";
        return 1;
      }
      return 0;
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.code()) << "]: " << e.what() << "\n";
    return e.code() == ErrorCode::ConfigError ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
