#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

#include "eegalc/checksum.hpp"
#include "eegalc/ingest/electrode_map.hpp"
#include "eegalc/ingest/gzip.hpp"
#include "eegalc/ingest/long_csv.hpp"
#include "eegalc/ingest/trial.hpp"
#include "eegalc/ingest/trial_text.hpp"
#include "eegalc/rng.hpp"

namespace eegalc::harness {

/// Toy corpus with a planted group difference: alcoholic trials share one
/// latent source across the parieto-occipital block (raising its channel
/// correlations) and sit slightly lower in voltage.
struct SyntheticOptions {
  std::size_t subjects_per_group = 2;
  std::size_t trials_per_subject = 4;
  std::uint64_t seed = 0;
  double coupling = 1.0;       // latent-source gain on the coupled block
  double noise_uv = 10.0;
  double offset_uv = -1.0;     // alcoholic DC shift
};

inline const std::vector<std::string>& coupled_block() {
  static const std::vector<std::string> b = {"PO1", "PO2", "POZ", "CPZ", "PZ", "O1", "O2", "OZ", "P1", "P2"};
  return b;
}

inline std::string synthetic_subject_id(Group g, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "co2%c%07zu", g == Group::alcoholic ? 'a' : 'c', 1000 + i);
  return buf;
}

inline Trial synthetic_trial(Rng& rng, Group g, const std::string& subject, std::size_t index,
                             const SyntheticOptions& o) {
  Trial t;
  t.subject_id = subject;
  t.group = g;
  static constexpr Stimulus kCycle[3] = {Stimulus::S1, Stimulus::S2_match, Stimulus::S2_nomatch};
  t.stimulus = kCycle[index % 3];
  t.data = MatrixD(kChannels, kSamples);
  std::vector<double> latent(kSamples);
  for (auto& v : latent) v = o.noise_uv * normal(rng);
  std::vector<bool> coupled(kChannels, false);
  for (const auto& name : coupled_block()) coupled[ElectrodeMap::standard().index_or_throw(name) - 1] = true;
  for (std::size_t c = 0; c < kChannels; ++c) {
    const double phase = 2.0 * std::numbers::pi * uniform01(rng);
    for (std::size_t s = 0; s < kSamples; ++s) {
      double v = o.noise_uv * normal(rng) +
                 5.0 * std::sin(2.0 * std::numbers::pi * 10.0 * static_cast<double>(s) / kSampleRate + phase);
      if (g == Group::alcoholic) {
        v += o.offset_uv;
        if (coupled[c]) v += o.coupling * latent[s];
      }
      t.data(c, s) = v;
    }
  }
  return t;
}

inline TrialSet synthetic_dataset(const SyntheticOptions& o = {}) {
  std::vector<Trial> trials;
  std::vector<std::string> provenance;
  for (Group g : {Group::alcoholic, Group::control}) {
    for (std::size_t s = 0; s < o.subjects_per_group; ++s) {
      const auto subject = synthetic_subject_id(g, s);
      Rng rng(derive_seed(o.seed, mix_seed(static_cast<std::uint64_t>(g) * 1000003ULL + s)));
      for (std::size_t i = 0; i < o.trials_per_subject; ++i) {
        trials.push_back(synthetic_trial(rng, g, subject, i, o));
        char name[64];
        std::snprintf(name, sizeof name, "%s/%s.rd.%03zu", subject.c_str(), subject.c_str(), i);
        provenance.push_back(name);
      }
    }
  }
  return TrialSet(std::move(trials), std::move(provenance));
}

/// One raw text file per trial, laid out <subject>/<subject>.rd.NNN[.gz].
inline void write_raw_files(const TrialSet& set, const std::filesystem::path& dir, bool compress = false) {
  for (std::size_t i = 0; i < set.size(); ++i) {
    std::string body = serialize_trial_text(set[i]);
    std::string name = set.provenance()[i];
    if (compress) {
      body = gzip(body);
      name += ".gz";
    }
    write_file_bytes(dir / name, body);
  }
}

}  // namespace eegalc::harness
