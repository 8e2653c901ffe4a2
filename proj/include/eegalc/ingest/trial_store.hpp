#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "eegalc/checksum.hpp"
#include "eegalc/error.hpp"
#include "eegalc/ingest/long_csv.hpp"
#include "eegalc/ingest/text_util.hpp"
#include "eegalc/ingest/trial.hpp"
#include "eegalc/ingest/trial_text.hpp"

namespace eegalc {

namespace fs = std::filesystem;

enum class InputFormat { raw, long_csv };

inline InputFormat parse_input_format(std::string_view s) {
  if (s == "raw") return InputFormat::raw;
  if (s == "long-csv" || s == "long_csv") return InputFormat::long_csv;
  fail(ErrorCode::InvalidArgument, "unknown input format '" + std::string(s) + "'");
}

/// 64 lines of 256 comma-separated values, 6 decimal places.
inline std::string trial_to_csv(const Trial& t) {
  std::string out;
  out.reserve(kChannels * kSamples * 12);
  char buf[48];
  for (std::size_t c = 0; c < kChannels; ++c) {
    for (std::size_t s = 0; s < kSamples; ++s) {
      const int n = std::snprintf(buf, sizeof buf, s == 0 ? "%.6f" : ",%.6f", t.data(c, s));
      out.append(buf, static_cast<std::size_t>(n));
    }
    out += '\n';
  }
  return out;
}

inline MatrixD trial_matrix_from_csv(std::string_view text) {
  MatrixD m(kChannels, kSamples, 0.0);
  std::size_t row = 0;
  detail::for_each_line(text, [&](std::string_view raw) {
    const auto line = detail::trim(raw);
    if (line.empty()) return;
    if (row >= kChannels) fail(ErrorCode::SampleCountMismatch, "more than 64 rows");
    const auto f = detail::split_char(line, ',');
    if (f.size() != kSamples) {
      fail(ErrorCode::SampleCountMismatch, "row " + std::to_string(row) + " has " +
                                               std::to_string(f.size()) + " values");
    }
    for (std::size_t s = 0; s < kSamples; ++s) {
      const auto v = detail::parse_double(f[s]);
      if (!v) fail(ErrorCode::MalformedRow, "row " + std::to_string(row));
      if (!std::isfinite(*v)) fail(ErrorCode::NonFiniteValue, "row " + std::to_string(row));
      m(row, s) = *v;
    }
    ++row;
  });
  if (row != kChannels) fail(ErrorCode::SampleCountMismatch, "expected 64 rows");
  return m;
}

/// Writes one CSV per trial plus manifest.json into dir.
inline void write_trial_set(const TrialSet& set, const fs::path& dir) {
  fs::create_directories(dir / "trials");
  nlohmann::json manifest;
  manifest["version"] = 1;
  manifest["sample_rate"] = kSampleRate;
  manifest["trials"] = nlohmann::json::array();
  for (std::size_t i = 0; i < set.size(); ++i) {
    const Trial& t = set[i];
    char name[32];
    std::snprintf(name, sizeof name, "%05zu", i);
    const std::string file = "trials/" + std::string(name) + ".csv";
    const std::string body = trial_to_csv(t);
    write_file_bytes(dir / file, body);
    manifest["trials"].push_back({{"file", file},
                                  {"subject_id", t.subject_id},
                                  {"group", to_string(t.group)},
                                  {"stimulus", to_string(t.stimulus)},
                                  {"source", set.provenance()[i]},
                                  {"checksum", sha256_hex(body)}});
  }
  write_file_bytes(dir / "manifest.json", manifest.dump(2) + "\n");
}

inline TrialSet read_trial_set(const fs::path& dir, bool verify_checksums = true) {
  const auto manifest = nlohmann::json::parse(read_file_bytes(dir / "manifest.json"));
  std::vector<Trial> trials;
  std::vector<std::string> provenance;
  for (const auto& e : manifest.at("trials")) {
    const std::string body = read_file_bytes(dir / e.at("file").get<std::string>());
    if (verify_checksums && sha256_hex(body) != e.at("checksum").get<std::string>()) {
      fail(ErrorCode::IoError, "checksum mismatch for " + e.at("file").get<std::string>());
    }
    Trial t;
    t.subject_id = e.at("subject_id").get<std::string>();
    t.group = parse_group(e.at("group").get<std::string>());
    t.stimulus = parse_stimulus(e.at("stimulus").get<std::string>());
    t.data = trial_matrix_from_csv(body);
    trials.push_back(std::move(t));
    provenance.push_back(e.value("source", std::string()));
  }
  return TrialSet(std::move(trials), std::move(provenance));
}

/// Parses every regular file under dir (sorted by path). Raw mode skips files
/// that do not look like trial files (no leading '#').
inline TrialSet ingest_directory(const fs::path& dir, InputFormat format) {
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());

  std::vector<Trial> trials;
  std::vector<std::string> provenance;
  for (const auto& f : files) {
    std::string bytes = maybe_gunzip(read_file_bytes(f));
    if (format == InputFormat::raw) {
      if (detail::trim(bytes).empty() || detail::trim(bytes).front() != '#') continue;
      trials.push_back(parse_trial_text(std::string_view(bytes)));
      provenance.push_back(f.string());
    } else {
      auto part = parse_long_csv(bytes, f.string());
      for (std::size_t i = 0; i < part.size(); ++i) {
        trials.push_back(part[i]);
        trials.back().subject_id = f.stem().string() + "-" + part[i].subject_id;
        provenance.push_back(part.provenance()[i]);
      }
    }
  }
  return TrialSet(std::move(trials), std::move(provenance));
}

}  // namespace eegalc
