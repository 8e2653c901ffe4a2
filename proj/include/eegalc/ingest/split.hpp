#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "eegalc/error.hpp"
#include "eegalc/ingest/trial.hpp"
#include "eegalc/rng.hpp"

namespace eegalc {

/// Predefined membership; entries match a trial's provenance path, its file
/// name, or its subject id.
struct GivenSplit {
  std::vector<std::string> train;
  std::vector<std::string> test;
};

/// Stratified by group over trials.
struct RandomSplit {
  double train_fraction = 0.5;
};

/// Stratified by group over subjects; no subject lands on both sides.
struct SubjectSplit {
  double train_fraction = 0.5;
};

using SplitPolicy = std::variant<GivenSplit, RandomSplit, SubjectSplit>;

struct SplitResult {
  TrialSet train;
  TrialSet test;
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> test_indices;
};

namespace detail {

/// Largest-remainder allocation of round(fraction * total) across strata.
/// Leftover units go to the strata with the largest fractional part, ties to
/// the lower stratum index.
inline std::vector<std::size_t> allocate(const std::vector<std::size_t>& sizes, double fraction) {
  std::size_t total = 0;
  for (auto s : sizes) total += s;
  const auto target = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(total)));
  std::vector<std::size_t> take(sizes.size());
  std::vector<std::pair<double, std::size_t>> rem;
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    const double exact = fraction * static_cast<double>(sizes[i]);
    take[i] = static_cast<std::size_t>(std::floor(exact));
    assigned += take[i];
    rem.emplace_back(exact - std::floor(exact), i);
  }
  std::stable_sort(rem.begin(), rem.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t r = 0; assigned < target && r < rem.size(); ++r) {
    const auto i = rem[r].second;
    if (take[i] < sizes[i]) {
      ++take[i];
      ++assigned;
    }
  }
  return take;
}

inline void require_both_classes(const TrialSet& set) {
  const auto counts = set.class_counts();
  for (auto [g, n] : counts) {
    if (n == 0) fail(ErrorCode::EmptyClass, std::string(to_string(g)) + " group absent");
  }
}

inline void check_fraction(double f) {
  if (!(f > 0.0 && f < 1.0)) fail(ErrorCode::InvalidArgument, "train fraction must be in (0,1)");
}

}  // namespace detail

inline SplitResult split_dataset(const TrialSet& set, const SplitPolicy& policy,
                                 std::uint64_t seed) {
  detail::require_both_classes(set);
  SplitResult out;

  if (const auto* given = std::get_if<GivenSplit>(&policy)) {
    const std::set<std::string> train(given->train.begin(), given->train.end());
    const std::set<std::string> test(given->test.begin(), given->test.end());
    for (std::size_t i = 0; i < set.size(); ++i) {
      const std::string& prov = set.provenance()[i];
      const std::string file = std::filesystem::path(prov).filename().string();
      const std::string& subj = set[i].subject_id;
      auto in = [&](const std::set<std::string>& s) {
        return s.count(prov) || s.count(file) || s.count(subj);
      };
      const bool a = in(train), b = in(test);
      if (a == b) {
        fail(ErrorCode::InvalidArgument,
             "trial '" + prov + "' must be listed in exactly one of train/test");
      }
      (a ? out.train_indices : out.test_indices).push_back(i);
    }
  } else if (const auto* rnd = std::get_if<RandomSplit>(&policy)) {
    detail::check_fraction(rnd->train_fraction);
    std::vector<std::vector<std::size_t>> strata(2);
    for (std::size_t i = 0; i < set.size(); ++i) strata[set[i].label()].push_back(i);
    const auto take = detail::allocate({strata[0].size(), strata[1].size()}, rnd->train_fraction);
    Rng rng(seed);
    for (std::size_t g = 0; g < 2; ++g) {
      shuffle(strata[g], rng);
      for (std::size_t j = 0; j < strata[g].size(); ++j) {
        (j < take[g] ? out.train_indices : out.test_indices).push_back(strata[g][j]);
      }
    }
  } else {
    const auto& subj = std::get<SubjectSplit>(policy);
    detail::check_fraction(subj.train_fraction);
    std::map<std::string, std::vector<std::size_t>> by_subject;
    std::map<std::string, int> subject_label;
    for (std::size_t i = 0; i < set.size(); ++i) {
      const auto& id = set[i].subject_id;
      by_subject[id].push_back(i);
      auto [it, inserted] = subject_label.emplace(id, set[i].label());
      if (!inserted && it->second != set[i].label()) {
        fail(ErrorCode::LabelConflict, "subject " + id + " appears in both groups");
      }
    }
    std::vector<std::vector<std::string>> strata(2);
    for (const auto& [id, label] : subject_label) strata[label].push_back(id);
    for (const auto& s : strata) {
      if (s.size() < 2) fail(ErrorCode::EmptyClass, "subject split needs >= 2 subjects per group");
    }
    auto take = detail::allocate({strata[0].size(), strata[1].size()}, subj.train_fraction);
    for (std::size_t g = 0; g < 2; ++g) {
      take[g] = std::clamp<std::size_t>(take[g], 1, strata[g].size() - 1);
    }
    Rng rng(seed);
    for (std::size_t g = 0; g < 2; ++g) {
      shuffle(strata[g], rng);
      for (std::size_t j = 0; j < strata[g].size(); ++j) {
        auto& side = j < take[g] ? out.train_indices : out.test_indices;
        const auto& idx = by_subject[strata[g][j]];
        side.insert(side.end(), idx.begin(), idx.end());
      }
    }
  }

  std::sort(out.train_indices.begin(), out.train_indices.end());
  std::sort(out.test_indices.begin(), out.test_indices.end());
  out.train = set.subset(out.train_indices);
  out.test = set.subset(out.test_indices);
  return out;
}

}  // namespace eegalc
