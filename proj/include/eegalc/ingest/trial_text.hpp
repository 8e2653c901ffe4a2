#pragma once

#include <array>
#include <cmath>
#include <istream>
#include <iterator>
#include <sstream>
#include <string>
#include <string_view>

#include "eegalc/error.hpp"
#include "eegalc/ingest/electrode_map.hpp"
#include "eegalc/ingest/gzip.hpp"
#include "eegalc/ingest/text_util.hpp"
#include "eegalc/ingest/trial.hpp"

namespace eegalc {

// Raw trial layout, as distributed with the public corpus:
//
//   # co2a0000364.rd
//   # 120 trials, 64 chans, 416 samples 368 post_stim samples
//   # 3.906000 msecs uV
//   # S1 obj , trial 0
//   # FP1 chan 0
//   0 FP1 0 -8.921
//   ...
//
// Data rows are `trial_no sensor_name sample_no value`. The subject id is the
// first header token; its fourth character encodes the group ('a' alcoholic,
// 'c' control) unless an explicit `# group <name>` line is present.

namespace detail {

inline Stimulus stimulus_from_header(std::string_view line) {
  const auto tok = split_ws(line);
  for (std::size_t i = 0; i < tok.size(); ++i) {
    if (tok[i] == "S1") return Stimulus::S1;
    if (tok[i] == "S2" && i + 1 < tok.size()) {
      std::string_view next = tok[i + 1];
      if (!next.empty() && next.back() == ',') next.remove_suffix(1);
      if (next == "match") return Stimulus::S2_match;
      if (next == "nomatch") return Stimulus::S2_nomatch;
      return Stimulus::unknown;
    }
  }
  return Stimulus::unknown;
}

}  // namespace detail

inline Trial parse_trial_text(std::string_view bytes,
                              const ElectrodeMap& map = ElectrodeMap::standard()) {
  std::string inflated;
  if (is_gzip(bytes)) {
    inflated = gunzip(bytes);
    bytes = inflated;
  }

  Trial trial;
  trial.data = MatrixD(kChannels, kSamples, 0.0);
  std::array<std::array<bool, kSamples>, kChannels> seen{};
  std::array<std::size_t, kChannels> counts{};

  bool have_subject = false;
  bool have_group = false;
  std::size_t line_no = 0;

  detail::for_each_line(bytes, [&](std::string_view raw) {
    ++line_no;
    const std::string_view line = detail::trim(raw);
    if (line.empty()) return;
    if (line.front() == '#') {
      const std::string_view body = detail::trim(line.substr(1));
      const auto tok = detail::split_ws(body);
      if (tok.empty()) return;
      if (!have_subject) {
        std::string_view id = tok[0];
        if (id.size() > 3 && id.substr(id.size() - 3) == ".rd") id.remove_suffix(3);
        trial.subject_id = std::string(id);
        have_subject = true;
        return;
      }
      if (tok[0] == "group" && tok.size() == 2) {
        try {
          trial.group = parse_group(tok[1]);
        } catch (const Error&) {
          fail(ErrorCode::MalformedHeader, "line " + std::to_string(line_no) + ": bad group");
        }
        have_group = true;
      } else if (tok.size() >= 2 && tok[1] == "msecs") {
        const auto period = detail::parse_double(tok[0]);
        if (!period || !(*period > 0.0)) {
          fail(ErrorCode::MalformedHeader, "line " + std::to_string(line_no) + ": sample period");
        }
        const double fs = 1000.0 / *period;
        if (std::abs(fs - kSampleRate) > 0.5) {
          fail(ErrorCode::UnsupportedRate, "sample rate " + std::to_string(fs) + " Hz");
        }
      } else if (tok[0] == "S1" || tok[0] == "S2") {
        trial.stimulus = detail::stimulus_from_header(body);
      }
      return;
    }

    const auto tok = detail::split_ws(line);
    if (tok.size() != 4) {
      fail(ErrorCode::MalformedRow, "line " + std::to_string(line_no) + ": expected 4 fields");
    }
    const auto ch = map.index(tok[1]);
    if (!ch) fail(ErrorCode::UnknownElectrode, std::string(tok[1]));
    const auto sample = detail::parse_int<long>(tok[2]);
    const auto value = detail::parse_double(tok[3]);
    if (!sample || !value) {
      fail(ErrorCode::MalformedRow, "line " + std::to_string(line_no));
    }
    if (*sample < 0 || *sample >= static_cast<long>(kSamples)) {
      fail(ErrorCode::SampleCountMismatch,
           "sample index " + std::to_string(*sample) + " on line " + std::to_string(line_no));
    }
    if (!std::isfinite(*value)) {
      fail(ErrorCode::NonFiniteValue, "line " + std::to_string(line_no));
    }
    const std::size_t row = *ch - 1;
    const auto s = static_cast<std::size_t>(*sample);
    if (seen[row][s]) {
      fail(ErrorCode::SampleCountMismatch,
           "duplicate sample " + std::to_string(s) + " for " + std::string(tok[1]));
    }
    seen[row][s] = true;
    ++counts[row];
    trial.data(row, s) = *value;
  });

  if (!have_subject) fail(ErrorCode::MalformedHeader, "missing subject header line");
  if (!have_group) {
    const std::string& id = trial.subject_id;
    if (id.size() < 4 || (id[3] != 'a' && id[3] != 'c')) {
      fail(ErrorCode::MalformedHeader, "cannot derive group from subject id '" + id + "'");
    }
    trial.group = id[3] == 'a' ? Group::alcoholic : Group::control;
  }
  for (std::size_t c = 0; c < kChannels; ++c) {
    if (counts[c] != kSamples) {
      fail(ErrorCode::SampleCountMismatch, std::string(map.name(c + 1)) + " has " +
                                               std::to_string(counts[c]) + " samples");
    }
  }
  return trial;
}

inline Trial parse_trial_text(std::istream& in,
                              const ElectrodeMap& map = ElectrodeMap::standard()) {
  std::string bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return parse_trial_text(std::string_view(bytes), map);
}

/// Writes a trial in the raw layout; values use the shortest exact decimal form.
inline std::string serialize_trial_text(const Trial& t,
                                        const ElectrodeMap& map = ElectrodeMap::standard()) {
  std::string out;
  out.reserve(kChannels * kSamples * 24);
  out += "# " + t.subject_id + ".rd\n";
  out += "# 1 trials, 64 chans, 256 samples\n";
  out += "# 3.906250 msecs uV\n";
  out += "# group " + std::string(to_string(t.group)) + "\n";
  switch (t.stimulus) {
    case Stimulus::S1: out += "# S1 obj , trial 0\n"; break;
    case Stimulus::S2_match: out += "# S2 match , trial 0\n"; break;
    case Stimulus::S2_nomatch: out += "# S2 nomatch , trial 0\n"; break;
    case Stimulus::unknown: break;
  }
  for (std::size_t c = 0; c < kChannels; ++c) {
    const std::string name(map.name(c + 1));
    out += "# " + name + " chan " + std::to_string(c) + "\n";
    for (std::size_t s = 0; s < kSamples; ++s) {
      out += "0 ";
      out += name;
      out += ' ';
      out += std::to_string(s);
      out += ' ';
      out += detail::format_exact(t.data(c, s));
      out += '\n';
    }
  }
  return out;
}

}  // namespace eegalc
