#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "eegalc/error.hpp"
#include "eegalc/ingest/gzip.hpp"
#include "eegalc/ingest/text_util.hpp"
#include "eegalc/ingest/trial.hpp"

namespace eegalc {

inline constexpr std::string_view kLongCsvHeader =
    "sensor position,sensor value,sample num,channel,subject identifier";
inline constexpr std::size_t kRowsPerTrial = kChannels * kSamples;  // 16384

/// One row of the long (flattened) table.
struct LongRecord {
  int sensor_position = 0;
  double sensor_value = 0.0;
  int sample_num = 0;
  int channel = 0;
  int subject_identifier = 0;  // 1 = alcoholic
};

constexpr std::uint64_t long_csv_row_count(std::uint64_t trials) {
  return trials * kRowsPerTrial;
}

namespace detail {

inline LongRecord parse_long_row(std::string_view line, std::size_t line_no) {
  const auto f = split_char(line, ',');
  if (f.size() != 5) {
    fail(ErrorCode::SchemaMismatch, "line " + std::to_string(line_no) + ": expected 5 columns");
  }
  LongRecord r;
  const auto pos = parse_int<int>(f[0]);
  const auto val = parse_double(f[1]);
  const auto smp = parse_int<int>(f[2]);
  const auto ch = parse_int<int>(f[3]);
  const auto sid = parse_int<int>(f[4]);
  if (!pos || !val || !smp || !ch || !sid) {
    fail(ErrorCode::SchemaMismatch, "line " + std::to_string(line_no) + ": unparsable field");
  }
  r = {*pos, *val, *smp, *ch, *sid};
  if (r.sample_num < 0 || r.sample_num >= static_cast<int>(kSamples) || r.channel < 0 ||
      r.channel >= static_cast<int>(kChannels) || r.sensor_position < 0 ||
      r.sensor_position >= static_cast<int>(kChannels) ||
      (r.subject_identifier != 0 && r.subject_identifier != 1)) {
    fail(ErrorCode::SchemaMismatch, "line " + std::to_string(line_no) + ": field out of range");
  }
  if (!std::isfinite(r.sensor_value)) {
    fail(ErrorCode::NonFiniteValue, "line " + std::to_string(line_no));
  }
  return r;
}

}  // namespace detail

/// Regroups consecutive blocks of 64x256 rows into trials. Within a block
/// each (channel, sample) pair must occur exactly once and the subject
/// identifier must be constant.
inline TrialSet parse_long_csv(std::string_view bytes, const std::string& source = "") {
  std::string inflated;
  if (is_gzip(bytes)) {
    inflated = gunzip(bytes);
    bytes = inflated;
  }

  std::vector<Trial> trials;
  std::vector<std::string> provenance;
  Trial current;
  std::vector<bool> seen(kRowsPerTrial, false);
  std::size_t filled = 0;
  int label = -1;
  bool header_seen = false;
  std::size_t line_no = 0;

  detail::for_each_line(bytes, [&](std::string_view raw) {
    ++line_no;
    const auto line = detail::trim(raw);
    if (line.empty()) return;
    if (!header_seen) {
      if (line != kLongCsvHeader) {
        fail(ErrorCode::SchemaMismatch, "header '" + std::string(line) + "'");
      }
      header_seen = true;
      return;
    }
    const LongRecord r = detail::parse_long_row(line, line_no);
    if (filled == 0) {
      current = Trial{};
      current.data = MatrixD(kChannels, kSamples, 0.0);
      label = r.subject_identifier;
    } else if (r.subject_identifier != label) {
      fail(ErrorCode::LabelConflict, "trial " + std::to_string(trials.size()) +
                                         " changes subject identifier at line " +
                                         std::to_string(line_no));
    }
    const std::size_t slot = static_cast<std::size_t>(r.channel) * kSamples + r.sample_num;
    if (seen[slot]) {
      fail(ErrorCode::IncompleteTrial, "trial " + std::to_string(trials.size()) +
                                           " repeats channel " + std::to_string(r.channel) +
                                           " sample " + std::to_string(r.sample_num));
    }
    seen[slot] = true;
    current.data(r.channel, r.sample_num) = r.sensor_value;
    if (++filled == kRowsPerTrial) {
      const std::size_t k = trials.size();
      current.subject_id = "long-" + std::to_string(k);
      current.group = label == 1 ? Group::alcoholic : Group::control;
      provenance.push_back(source.empty() ? current.subject_id
                                          : source + "#" + std::to_string(k));
      trials.push_back(std::move(current));
      std::fill(seen.begin(), seen.end(), false);
      filled = 0;
    }
  });

  if (!header_seen) fail(ErrorCode::SchemaMismatch, "missing header row");
  if (filled != 0) {
    fail(ErrorCode::IncompleteTrial, "trailing trial has " + std::to_string(filled) + " of " +
                                         std::to_string(kRowsPerTrial) + " rows");
  }
  return TrialSet(std::move(trials), std::move(provenance));
}

/// Flattens trials in channel-major, sample-minor order.
inline std::string write_long_csv(const TrialSet& set) {
  std::string out(kLongCsvHeader);
  out += '\n';
  for (const auto& t : set.trials()) {
    const std::string sid = std::to_string(t.label());
    for (std::size_t c = 0; c < kChannels; ++c) {
      const std::string ch = std::to_string(c);
      for (std::size_t s = 0; s < kSamples; ++s) {
        out += ch;
        out += ',';
        out += detail::format_exact(t.data(c, s));
        out += ',';
        out += std::to_string(s);
        out += ',';
        out += ch;
        out += ',';
        out += sid;
        out += '\n';
      }
    }
  }
  return out;
}

}  // namespace eegalc
