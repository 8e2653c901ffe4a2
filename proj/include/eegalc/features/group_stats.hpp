#pragma once

#include <map>
#include <vector>

#include "eegalc/error.hpp"
#include "eegalc/ingest/trial.hpp"

namespace eegalc {

struct GroupVoltageStats {
  std::map<Group, std::vector<double>> per_electrode_mean;
  double fraction_alcoholic_lower = 0.0;
};

/// Per-electrode mean voltage over all samples and trials of each group, and
/// the share of electrodes where the alcoholic mean is strictly lower.
inline GroupVoltageStats group_voltage_stats(const TrialSet& set) {
  GroupVoltageStats st;
  std::map<Group, std::size_t> trials;
  for (Group g : {Group::control, Group::alcoholic}) {
    st.per_electrode_mean[g].assign(kChannels, 0.0);
    trials[g] = 0;
  }
  for (const auto& t : set.trials()) {
    auto& acc = st.per_electrode_mean[t.group];
    for (std::size_t c = 0; c < kChannels; ++c) {
      double s = 0.0;
      for (double v : t.data.row(c)) s += v;
      acc[c] += s / static_cast<double>(kSamples);
    }
    ++trials[t.group];
  }
  for (auto [g, n] : trials) {
    if (n == 0) fail(ErrorCode::EmptyClass, std::string(to_string(g)) + " group absent");
    for (auto& v : st.per_electrode_mean[g]) v /= static_cast<double>(n);
  }
  std::size_t lower = 0;
  for (std::size_t c = 0; c < kChannels; ++c) {
    if (st.per_electrode_mean[Group::alcoholic][c] < st.per_electrode_mean[Group::control][c]) {
      ++lower;
    }
  }
  st.fraction_alcoholic_lower = static_cast<double>(lower) / static_cast<double>(kChannels);
  return st;
}

}  // namespace eegalc
