#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "eegalc/checksum.hpp"
#include "eegalc/dsp/bands.hpp"
#include "eegalc/dsp/fft.hpp"
#include "eegalc/features/svg.hpp"
#include "eegalc/harness/matrix.hpp"

namespace eegalc::harness {

/// Published CNN accuracy (percent) per feature kind.
inline constexpr std::array<std::pair<FeatureKind, double>, 7> kReferenceCnnPercent = {{
    {FeatureKind::correlation, 92.0},
    {FeatureKind::raw, 86.0},
    {FeatureKind::beta, 85.0},
    {FeatureKind::alpha, 82.0},
    {FeatureKind::theta, 75.0},
    {FeatureKind::fft, 75.0},
    {FeatureKind::delta, 56.0},
}};

inline double reference_cnn_percent(FeatureKind k) {
  for (auto [kind, v] : kReferenceCnnPercent) {
    if (kind == k) return v;
  }
  return 0.0;
}

inline constexpr double kReferenceCnnTolerancePp = 8.0;
inline constexpr double kReferenceAlcoholicLower = 0.72;
inline constexpr double kReferenceAlcoholicLowerTolerance = 0.15;

/// Published accuracy for the classical models on correlation features and
/// the band accepted around it.
struct ClassicTarget {
  ml::ClassifierKind kind;
  double reference;
  double lo, hi;
};

inline constexpr std::array<ClassicTarget, 6> kClassicTargets = {{
    {ml::ClassifierKind::cart, 0.81, 0.70, 1.0},
    {ml::ClassifierKind::random_forest, 0.75, 0.65, 1.0},
    {ml::ClassifierKind::logreg, 0.50, 0.40, 0.65},
    {ml::ClassifierKind::gnb, 0.50, 0.40, 0.65},
    {ml::ClassifierKind::knn, 0.50, 0.40, 0.65},
    {ml::ClassifierKind::svm_linear, 0.50, 0.40, 0.65},
}};

struct ReferenceCheck {
  std::string name;
  bool applicable = true;  // false when the needed cells were not run
  bool passed = false;
  bool hard = true;        // soft checks are reported but never fail a run
  std::string detail;
};

inline std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

inline const std::vector<std::pair<std::string, std::string>>& reference_pairs() {
  static const std::vector<std::pair<std::string, std::string>> p = {{"PO1", "CPZ"}, {"PO2", "CPZ"},
                                                                     {"F4", "C4"}};
  return p;
}

inline bool pair_matches(const ElectrodePair& p, const std::string& a, const std::string& b) {
  return (p.a == a && p.b == b) || (p.a == b && p.b == a);
}

/// Empty when the run carries no correlation summary (a table-only report).
inline std::vector<ElectrodePair> top_pairs(const CorrelationMatrix& c) {
  if (c.values.rows() != kChannels) return {};
  return top_correlated_pairs(c, 10);
}

/// Reference comparisons for one split.
inline std::vector<ReferenceCheck> reference_checks(const MatrixRun& run, const std::string& split) {
  std::vector<ReferenceCheck> out;
  const auto& t = run.table;

  // CNN per-kind gaps and ordering.
  std::vector<std::pair<FeatureKind, double>> cnn;
  for (auto k : kAllFeatureKinds) {
    const auto* c = t.find(split, kCnnModelId, k);
    if (c == nullptr || !c->ok) continue;
    cnn.emplace_back(k, 100.0 * c->accuracy);
    const double ref = reference_cnn_percent(k);
    const double gap = 100.0 * c->accuracy - ref;
    out.push_back({"cnn_" + std::string(to_string(k)) + "_within_8pp", true,
                   std::abs(gap) <= kReferenceCnnTolerancePp, false,
                   format_percent(c->accuracy) + " vs reference " + fmt("%.0f", ref) + " (gap " +
                       fmt("%+.1f", gap) + " pp)"});
  }
  {
    ReferenceCheck ord{"cnn_ordering_correlation_highest_delta_lowest", cnn.size() == 7, false, true, ""};
    if (ord.applicable) {
      auto acc = [&](FeatureKind k) {
        return std::find_if(cnn.begin(), cnn.end(), [&](auto& p) { return p.first == k; })->second;
      };
      const double corr = acc(FeatureKind::correlation), delta = acc(FeatureKind::delta);
      bool hi = true, lo = true;
      for (auto [k, v] : cnn) {
        if (k != FeatureKind::correlation && v >= corr) hi = false;
        if (k != FeatureKind::delta && v <= delta) lo = false;
      }
      ord.passed = hi && lo;
      ord.detail = std::string("correlation ") + (hi ? "is" : "is not") + " strictly highest; delta " +
                   (lo ? "is" : "is not") + " strictly lowest";
    } else {
      ord.detail = "needs all seven CNN cells";
    }
    out.push_back(ord);
  }

  for (const auto& target : kClassicTargets) {
    const std::string id(ml::to_string(target.kind));
    const auto* c = t.find(split, id, FeatureKind::correlation);
    ReferenceCheck r{id + "_correlation_target", c != nullptr && c->ok, false, true, ""};
    if (r.applicable) {
      r.passed = c->accuracy >= target.lo && c->accuracy <= target.hi;
      r.detail = fmt("%.3f", c->accuracy) + " in [" + fmt("%.2f", target.lo) + ", " + fmt("%.2f", target.hi) +
                 "] (reference " + fmt("%.2f", target.reference) + ")";
    } else {
      r.detail = "cell not run";
    }
    out.push_back(r);
  }

  const double f = run.voltage.fraction_alcoholic_lower;
  out.push_back({"alcoholic_lower_fraction", !run.voltage.per_electrode_mean.empty(),
                 std::abs(f - kReferenceAlcoholicLower) <= kReferenceAlcoholicLowerTolerance, false,
                 fmt("%.3f", f) + " vs reference 0.72 +/- 0.15"});

  const auto top = top_pairs(run.pooled_correlation);
  std::vector<std::string> found;
  for (const auto& [a, b] : reference_pairs()) {
    if (std::any_of(top.begin(), top.end(), [&](const auto& p) { return pair_matches(p, a, b); })) {
      found.push_back(a + "-" + b);
    }
  }
  const bool po = std::find(found.begin(), found.end(), "PO1-CPZ") != found.end() ||
                  std::find(found.begin(), found.end(), "PO2-CPZ") != found.end();
  const bool f4 = std::find(found.begin(), found.end(), "F4-C4") != found.end();
  std::string list;
  for (const auto& s : found) list += (list.empty() ? "" : ", ") + s;
  out.push_back({"reference_pairs_in_top10", !top.empty(), po && f4, false,
                 "PO1/PO2-CPZ " + std::string(po ? "present" : "absent") + ", F4-C4 " +
                     (f4 ? "present" : "absent") + (list.empty() ? "" : " (" + list + ")") +
                     "; the map has no PO3, so PO1 and PO2 stand in for it"});
  return out;
}

inline nlohmann::json to_json(const ReferenceCheck& r) {
  return {{"name", r.name}, {"applicable", r.applicable}, {"passed", r.passed}, {"hard", r.hard},
          {"detail", r.detail}};
}

inline nlohmann::json pairs_json(const std::vector<ElectrodePair>& ps) {
  nlohmann::json a = nlohmann::json::array();
  for (const auto& p : ps) a.push_back({{"a", p.a}, {"b", p.b}, {"value", p.value}});
  return a;
}

inline std::string table_markdown(const MatrixRun& run) {
  const auto& t = run.table;
  std::string s = "# Classification accuracy (%)\n\n";
  s += "Config hash `" + t.config_hash + "`, seed " + std::to_string(t.seed) + ".\n\n";
  for (const auto& split : t.splits) {
    s += "## Split: " + split + "\n\n| model |";
    for (auto k : kAllFeatureKinds) s += " " + std::string(to_string(k)) + " |";
    s += "\n|---|";
    for (std::size_t i = 0; i < kAllFeatureKinds.size(); ++i) s += "---:|";
    s += "\n";
    for (const auto& m : t.models) {
      s += "| " + m + " |";
      for (auto k : kAllFeatureKinds) {
        const auto* c = t.find(split, m, k);
        if (c == nullptr) {
          s += " |";
        } else if (!c->ok) {
          s += " FAIL |";
        } else {
          s += " " + format_percent(c->accuracy) + (c->extension ? "*" : "") + " |";
        }
      }
      s += "\n";
    }
    s += "\n* classical model on a feature kind outside the published comparison (extension cell).\n\n";

    bool any_cnn = false;
    for (auto k : kAllFeatureKinds) any_cnn = any_cnn || t.find(split, kCnnModelId, k) != nullptr;
    if (any_cnn) {
      s += "### CNN vs reference accuracy\n\n| feature kind | measured | reference | gap (pp) | within 8 pp |\n"
           "|---|---:|---:|---:|:---:|\n";
      for (auto k : kAllFeatureKinds) {
        const auto* c = t.find(split, kCnnModelId, k);
        if (c == nullptr || !c->ok) continue;
        const double ref = reference_cnn_percent(k);
        const double gap = 100.0 * c->accuracy - ref;
        s += "| " + std::string(to_string(k)) + " | " + format_percent(c->accuracy) + " | " + fmt("%.0f", ref) +
             " | " + fmt("%+.1f", gap) + " | " + (std::abs(gap) <= kReferenceCnnTolerancePp ? "yes" : "GAP") +
             " |\n";
      }
      s += "\n";
    }
    s += "### Reference checks\n\n| check | result | detail |\n|---|:---:|---|\n";
    for (const auto& r : reference_checks(run, split)) {
      const std::string res = !r.applicable ? "n/a" : r.passed ? "pass" : (r.hard ? "FAIL" : "flag");
      s += "| " + r.name + " | " + res + " | " + r.detail + " |\n";
    }
    s += "\n";
  }

  s += "## Group voltage\n\nFraction of electrodes where the alcoholic-group mean voltage is lower than "
       "the control-group mean: " +
       fmt("%.3f", run.voltage.fraction_alcoholic_lower) + " (reference 0.72).\n\n";

  s += "## Top correlated electrode pairs\n\n";
  auto pair_table = [&](const std::string& title, const CorrelationMatrix& c) {
    s += "### " + title + "\n\n| rank | pair | r |\n|---:|---|---:|\n";
    const auto top = top_pairs(c);
    for (std::size_t i = 0; i < top.size(); ++i) {
      s += "| " + std::to_string(i + 1) + " | " + top[i].a + "-" + top[i].b + " | " + fmt("%.4f", top[i].value) +
           " |\n";
    }
    s += "\n";
  };
  pair_table("Both groups", run.pooled_correlation);
  for (const auto& [g, c] : run.group_correlation) pair_table(std::string(to_string(g)), c);
  s += "The reference pairs are PO3-CPZ and F4-C4. The electrode map has no PO3 channel, so PO1-CPZ and "
       "PO2-CPZ are checked in its place.\n";
  return s;
}

inline nlohmann::json results_json(const MatrixRun& run) {
  const auto& t = run.table;
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& c : t.cells) {
    auto j = detail::cell_report_json(c);
    if (c.history) {
      nlohmann::json h = nlohmann::json::array();
      for (const auto& e : c.history->epochs) h.push_back({e.train_loss, e.train_acc, e.val_acc});
      j["history"] = {{"best_epoch", c.history->best_epoch + 1}, {"epochs", h}};
    }
    cells.push_back(j);
  }
  nlohmann::json checks = nlohmann::json::object();
  for (const auto& s : t.splits) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& r : reference_checks(run, s)) a.push_back(to_json(r));
    checks[s] = a;
  }
  nlohmann::json groups = nlohmann::json::object();
  for (const auto& [g, c] : run.group_correlation) groups[std::string(to_string(g))] = pairs_json(top_pairs(c));
  nlohmann::json means = nlohmann::json::object();
  for (const auto& [g, v] : run.voltage.per_electrode_mean) means[std::string(to_string(g))] = v;
  return {{"config_hash", t.config_hash},
          {"seed", t.seed},
          {"splits", t.splits},
          {"models", t.models},
          {"cells", cells},
          {"reference_checks", checks},
          {"group_voltage", {{"fraction_alcoholic_lower", run.voltage.fraction_alcoholic_lower},
                             {"per_electrode_mean", means}}},
          {"top_pairs", {{"pooled", pairs_json(top_pairs(run.pooled_correlation))},
                         {"by_group", groups}}}};
}

inline FeatureTensor correlation_image(const CorrelationMatrix& c, Group g) {
  FeatureTensor ft;
  ft.kind = FeatureKind::correlation;
  ft.shape = feature_shape(FeatureKind::correlation);
  ft.data = c.values.data();
  ft.label = g;
  return ft;
}

/// Writes table.csv, table.md, results.json, plots/*.svg and finally
/// manifest.json, which lists every file under `out` with its checksum.
inline RunManifest emit_report(const MatrixRun& run, const fs::path& out) {
  fs::create_directories(out / "plots");
  write_file_bytes(out / "table.csv", table_csv(run.table));
  write_file_bytes(out / "table.md", table_markdown(run));
  write_file_bytes(out / "results.json", results_json(run).dump(2) + "\n");

  for (const auto& split : run.table.splits) {
    for (const auto& m : run.table.models) {
      std::vector<Bar> bars;
      for (auto k : kAllFeatureKinds) {
        const auto* c = run.table.find(split, m, k);
        if (c != nullptr && c->ok) bars.push_back({std::string(to_string(k)), 100.0 * c->accuracy});
      }
      if (!bars.empty()) {
        write_file_bytes(out / "plots" / ("accuracy_" + split + "_" + m + ".svg"),
                         bar_chart_svg(bars, m + " accuracy by feature kind (" + split + " split)"));
      }
    }
  }
  for (const auto& [g, c] : run.group_correlation) {
    const std::string name(to_string(g));
    write_file_bytes(out / "plots" / ("correlation_" + name + ".svg"),
                     heatmap_svg(correlation_image(c, g), "Mean correlation, " + name + " group", true));
  }
  if (run.example) {
    const auto& t = *run.example;
    const std::size_t ch = ElectrodeMap::standard().index("CZ").value_or(1) - 1;
    const auto row = t.data.row(ch);
    const auto d = band_decompose(row, t.sample_rate, run.config.dsp.band_method);
    std::vector<Series> bands{{"signal", {row.begin(), row.end()}}};
    for (auto b : kBands) bands.push_back({std::string(to_string(b)), d[b]});
    bands.push_back({"residual", d.residual});
    const std::string label = t.subject_id + " " + std::string(electrode_name(ch + 1));
    write_file_bytes(out / "plots" / "bands.svg",
                     line_plot_svg(bands, 1.0 / t.sample_rate, "time (s)", "Band components, " + label));
    const auto mag = one_sided_magnitude(row);
    write_file_bytes(out / "plots" / "spectrum.svg",
                     line_plot_svg({{"|X(f)|", mag}}, t.sample_rate / static_cast<double>(row.size()),
                                   "frequency (Hz)", "Amplitude spectrum, " + label));
  }

  RunManifest m = run.manifest;
  m.artifacts.clear();
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(out)) {
    if (e.is_regular_file() && e.path().filename() != "manifest.json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) m.artifacts.emplace_back(fs::relative(f, out).generic_string(), file_sha256(f));

  nlohmann::json j;
  j["config_hash"] = m.config_hash;
  j["config"] = to_json(run.config);
  j["inputs"] = nlohmann::json::array();
  for (const auto& [p, h] : m.inputs) j["inputs"].push_back({{"path", p}, {"sha256", h}});
  j["durations_seconds"] = nlohmann::json::array();
  for (const auto& [stage, sec] : m.durations) j["durations_seconds"].push_back({{"stage", stage}, {"seconds", sec}});
  j["artifacts"] = nlohmann::json::array();
  for (const auto& [p, h] : m.artifacts) j["artifacts"].push_back({{"path", p}, {"sha256", h}});
  write_file_bytes(out / "manifest.json", j.dump(2) + "\n");
  return m;
}

}  // namespace eegalc::harness
