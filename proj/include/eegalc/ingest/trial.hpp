#pragma once

#include <cmath>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "eegalc/error.hpp"
#include "eegalc/ingest/electrode_map.hpp"
#include "eegalc/matrix.hpp"

namespace eegalc {

enum class Group { control = 0, alcoholic = 1 };
enum class Stimulus { S1, S2_match, S2_nomatch, unknown };

constexpr std::string_view to_string(Group g) {
  return g == Group::alcoholic ? "alcoholic" : "control";
}

inline Group parse_group(std::string_view s) {
  if (s == "alcoholic") return Group::alcoholic;
  if (s == "control") return Group::control;
  fail(ErrorCode::InvalidArgument, "group '" + std::string(s) + "'");
}

constexpr std::string_view to_string(Stimulus s) {
  switch (s) {
    case Stimulus::S1: return "S1";
    case Stimulus::S2_match: return "S2_match";
    case Stimulus::S2_nomatch: return "S2_nomatch";
    case Stimulus::unknown: return "unknown";
  }
  return "unknown";
}

inline Stimulus parse_stimulus(std::string_view s) {
  if (s == "S1") return Stimulus::S1;
  if (s == "S2_match") return Stimulus::S2_match;
  if (s == "S2_nomatch") return Stimulus::S2_nomatch;
  return Stimulus::unknown;
}

/// One subject-stimulus recording: 64 channels x 256 samples in microvolts.
struct Trial {
  std::string subject_id;
  Group group = Group::control;
  Stimulus stimulus = Stimulus::unknown;
  MatrixD data{kChannels, kSamples};
  double sample_rate = kSampleRate;

  int label() const { return static_cast<int>(group); }
};

/// Throws unless the trial is 64x256, finite, and sampled at 256 Hz.
inline void validate(const Trial& t) {
  if (t.data.rows() != kChannels || t.data.cols() != kSamples) {
    fail(ErrorCode::SampleCountMismatch, "trial " + t.subject_id + " is not 64x256");
  }
  if (t.sample_rate != kSampleRate) {
    fail(ErrorCode::UnsupportedRate, "sample rate " + std::to_string(t.sample_rate));
  }
  for (double v : t.data.data()) {
    if (!std::isfinite(v)) fail(ErrorCode::NonFiniteValue, "trial " + t.subject_id);
  }
}

class TrialSet {
 public:
  TrialSet() = default;
  TrialSet(std::vector<Trial> trials, std::vector<std::string> provenance)
      : trials_(std::move(trials)), provenance_(std::move(provenance)) {
    if (!provenance_.empty() && provenance_.size() != trials_.size()) {
      fail(ErrorCode::InvalidArgument, "provenance list does not match trial count");
    }
    for (const auto& t : trials_) validate(t);
    if (provenance_.empty()) provenance_.resize(trials_.size());
  }

  const std::vector<Trial>& trials() const noexcept { return trials_; }
  const std::vector<std::string>& provenance() const noexcept { return provenance_; }
  std::size_t size() const noexcept { return trials_.size(); }
  bool empty() const noexcept { return trials_.empty(); }
  const Trial& operator[](std::size_t i) const { return trials_[i]; }

  std::map<Group, std::size_t> class_counts() const {
    std::map<Group, std::size_t> counts{{Group::control, 0}, {Group::alcoholic, 0}};
    for (const auto& t : trials_) ++counts[t.group];
    return counts;
  }

  TrialSet subset(const std::vector<std::size_t>& indices) const {
    TrialSet out;
    out.trials_.reserve(indices.size());
    for (auto i : indices) {
      out.trials_.push_back(trials_.at(i));
      out.provenance_.push_back(provenance_.at(i));
    }
    return out;
  }

 private:
  std::vector<Trial> trials_;
  std::vector<std::string> provenance_;
};

}  // namespace eegalc
