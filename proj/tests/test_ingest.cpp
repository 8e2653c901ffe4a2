#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "support.hpp"

using namespace eegalc;
using testing_support::error_code_of;
using testing_support::noise_trial;
using testing_support::TempDir;

namespace {

std::string zero_file(std::size_t fp1_samples = kSamples) {
  std::string s = "# co2a0000364.rd\n# 120 trials, 64 chans, 416 samples\n# 3.906000 msecs uV\n"
                  "# S1 obj , trial 0\n";
  for (std::size_t c = 1; c <= kChannels; ++c) {
    const std::string name(electrode_name(c));
    s += "# " + name + " chan " + std::to_string(c - 1) + "\n";
    const std::size_t n = c == 1 ? fp1_samples : kSamples;
    for (std::size_t i = 0; i < n; ++i) s += "0 " + name + " " + std::to_string(i) + " 0.000\n";
  }
  return s;
}

TrialSet toy_set(std::size_t alc, std::size_t ctl, std::uint64_t seed = 1) {
  Rng rng(seed);
  std::vector<Trial> trials;
  std::vector<std::string> prov;
  for (std::size_t i = 0; i < alc + ctl; ++i) {
    const bool a = i < alc;
    trials.push_back(noise_trial(rng, a ? Group::alcoholic : Group::control,
                                 (a ? "co2a" : "co2c") + std::to_string(i / 2)));
    prov.push_back("trial_" + std::to_string(i));
  }
  return TrialSet(std::move(trials), std::move(prov));
}

}  // namespace

TEST(ElectrodeMap, TableNames) {
  EXPECT_EQ(electrode_name(1), "FP1");
  EXPECT_EQ(electrode_name(16), "CZ");
  EXPECT_EQ(electrode_name(64), "Y");
  EXPECT_EQ(electrode_name(7), "FZ1");
  EXPECT_EQ(electrode_name(63), "nd");
}

TEST(ElectrodeMap, OutOfRange) {
  EXPECT_EQ(error_code_of([] { electrode_name(0); }), ErrorCode::IndexOutOfRange);
  EXPECT_EQ(error_code_of([] { electrode_name(65); }), ErrorCode::IndexOutOfRange);
}

TEST(ElectrodeMap, LookupsAreMutualInverses) {
  const auto& map = ElectrodeMap::standard();
  std::set<std::string> names;
  for (std::size_t i = 1; i <= 64; ++i) {
    names.emplace(map.name(i));
    EXPECT_EQ(map.index(map.name(i)), i);
  }
  EXPECT_EQ(names.size(), 64u);
  EXPECT_EQ(map.index("fz"), 7u);
  EXPECT_EQ(map.index("PO3"), std::nullopt);
}

TEST(ParseTrialText, ZeroFile) {
  const Trial t = parse_trial_text(zero_file());
  EXPECT_EQ(t.subject_id, "co2a0000364");
  EXPECT_EQ(t.group, Group::alcoholic);
  EXPECT_EQ(t.stimulus, Stimulus::S1);
  for (double v : t.data.data()) EXPECT_EQ(v, 0.0);
}

TEST(ParseTrialText, ShortChannel) {
  EXPECT_EQ(error_code_of([] { parse_trial_text(zero_file(255)); }),
            ErrorCode::SampleCountMismatch);
}

TEST(ParseTrialText, ErrorCases) {
  std::string unknown = zero_file();
  unknown.replace(unknown.find("0 FP1 0"), 7, "0 QQ9 0");
  EXPECT_EQ(error_code_of([&] { parse_trial_text(unknown); }), ErrorCode::UnknownElectrode);

  std::string nan = zero_file();
  nan.replace(nan.find("0 FP1 3 0.000"), 13, "0 FP1 3 nan");
  EXPECT_EQ(error_code_of([&] { parse_trial_text(nan); }), ErrorCode::NonFiniteValue);

  EXPECT_EQ(error_code_of([] { parse_trial_text(std::string("0 FP1 0 1.0\n")); }),
            ErrorCode::MalformedHeader);

  std::string rate = zero_file();
  rate.replace(rate.find("3.906000"), 8, "7.812500");
  EXPECT_EQ(error_code_of([&] { parse_trial_text(rate); }), ErrorCode::UnsupportedRate);

  std::string row = zero_file();
  row.replace(row.find("0 FP1 5 0.000"), 13, "0 FP1 5");
  EXPECT_EQ(error_code_of([&] { parse_trial_text(row); }), ErrorCode::MalformedRow);
}

TEST(ParseTrialText, StimulusHeaders) {
  std::string m = zero_file();
  m.replace(m.find("S1 obj"), 6, "S2 match");
  EXPECT_EQ(parse_trial_text(m).stimulus, Stimulus::S2_match);
  std::string n = zero_file();
  n.replace(n.find("S1 obj"), 6, "S2 nomatch,");
  EXPECT_EQ(parse_trial_text(n).stimulus, Stimulus::S2_nomatch);
}

TEST(ParseTrialText, RoundTripIsBitIdentical) {
  Rng rng(7);
  for (int k = 0; k < 5; ++k) {
    Trial t = noise_trial(rng, k % 2 ? Group::alcoholic : Group::control, "subj" + std::to_string(k));
    for (auto& v : t.data.data()) v *= std::pow(10.0, uniform(rng, -6, 6));
    t.stimulus = Stimulus::S2_nomatch;
    const Trial back = parse_trial_text(serialize_trial_text(t));
    EXPECT_EQ(back.subject_id, t.subject_id);
    EXPECT_EQ(back.group, t.group);
    EXPECT_EQ(back.stimulus, t.stimulus);
    EXPECT_EQ(back.data.data(), t.data.data());
  }
}

TEST(ParseTrialText, GzipAndStream) {
  Rng rng(3);
  const Trial t = noise_trial(rng, Group::control, "co2c0000001");
  const std::string text = serialize_trial_text(t);
  EXPECT_EQ(parse_trial_text(gzip(text)).data.data(), t.data.data());
  std::istringstream in(text);
  EXPECT_EQ(parse_trial_text(in).data.data(), t.data.data());
  EXPECT_EQ(error_code_of([&] { gunzip(gzip(text).substr(0, 40)); }), ErrorCode::IoError);
}

TEST(LongCsv, OneTrial) {
  const auto set = toy_set(1, 0);
  const std::string csv = write_long_csv(set);
  std::size_t lines = 0;
  for (char c : csv) lines += c == '\n';
  EXPECT_EQ(lines, 1 + 16384u);
  const TrialSet back = parse_long_csv(csv);
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0].group, Group::alcoholic);
  EXPECT_EQ(back[0].data.data(), set[0].data.data());
}

TEST(LongCsv, CorpusRowCount) { EXPECT_EQ(long_csv_row_count(478), 7831552u); }

TEST(LongCsv, LabelFlipInsideTrial) {
  std::string csv = write_long_csv(toy_set(0, 1));
  const auto pos = csv.rfind(",0\n");
  csv.replace(pos, 3, ",1\n");
  EXPECT_EQ(error_code_of([&] { parse_long_csv(csv); }), ErrorCode::LabelConflict);
}

TEST(LongCsv, SchemaAndIncomplete) {
  EXPECT_EQ(error_code_of([] { parse_long_csv("a,b,c\n1,2,3\n"); }), ErrorCode::SchemaMismatch);
  std::string csv = write_long_csv(toy_set(1, 0));
  csv.resize(csv.rfind('\n', csv.size() - 2) + 1);
  EXPECT_EQ(error_code_of([&] { parse_long_csv(csv); }), ErrorCode::IncompleteTrial);
  std::string bad = std::string(kLongCsvHeader) + "\n0,1.0,256,0,0\n";
  EXPECT_EQ(error_code_of([&] { parse_long_csv(bad); }), ErrorCode::SchemaMismatch);
}

TEST(LongCsv, MultiTrialGzipRoundTrip) {
  const auto set = toy_set(2, 3);
  const TrialSet back = parse_long_csv(gzip(write_long_csv(set)));
  ASSERT_EQ(back.size(), set.size());
  for (std::size_t i = 0; i < set.size(); ++i) {
    EXPECT_EQ(back[i].group, set[i].group);
    EXPECT_EQ(back[i].data.data(), set[i].data.data());
  }
}

TEST(TrialSet, ClassCountsSumToSize) {
  const auto set = toy_set(3, 4);
  std::size_t sum = 0;
  for (auto [g, n] : set.class_counts()) sum += n;
  EXPECT_EQ(sum, set.size());
  Trial bad;
  bad.data = MatrixD(64, 255);
  EXPECT_EQ(error_code_of([&] { TrialSet({bad}, {}); }), ErrorCode::SampleCountMismatch);
  Trial slow;
  slow.sample_rate = 128;
  EXPECT_EQ(error_code_of([&] { TrialSet({slow}, {}); }), ErrorCode::UnsupportedRate);
}

TEST(Store, WriteReadRoundTrip) {
  TempDir dir("store");
  const auto set = toy_set(2, 2);
  write_trial_set(set, dir.path());
  const TrialSet back = read_trial_set(dir.path());
  ASSERT_EQ(back.size(), set.size());
  for (std::size_t i = 0; i < set.size(); ++i) {
    EXPECT_EQ(back[i].subject_id, set[i].subject_id);
    for (std::size_t k = 0; k < set[i].data.size(); ++k) {
      EXPECT_NEAR(back[i].data.data()[k], set[i].data.data()[k], 5e-7);
    }
  }
}

TEST(Store, IngestDirectoryMixedCompression) {
  TempDir dir("raw");
  const auto set = toy_set(1, 1);
  write_file_bytes(dir / "a.rd", serialize_trial_text(set[0]));
  write_file_bytes(dir / "b.rd.gz", gzip(serialize_trial_text(set[1])));
  write_file_bytes(dir / "README", "not a trial");
  const TrialSet back = ingest_directory(dir.path(), InputFormat::raw);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[1].data.data(), set[1].data.data());
}

TEST(Split, StratifiedHalfOnTen) {
  const auto set = toy_set(5, 5);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto r = split_dataset(set, RandomSplit{0.5}, seed);
    EXPECT_EQ(r.train.size(), 5u);
    EXPECT_EQ(r.test.size(), 5u);
    const auto c = r.train.class_counts();
    EXPECT_GE(c.at(Group::alcoholic), 2u);
    EXPECT_LE(c.at(Group::alcoholic), 3u);
  }
}

TEST(Split, DeterministicForSeed) {
  const auto set = toy_set(6, 9);
  const auto a = split_dataset(set, RandomSplit{0.3}, 42);
  const auto b = split_dataset(set, RandomSplit{0.3}, 42);
  EXPECT_EQ(a.train_indices, b.train_indices);
  EXPECT_EQ(a.test_indices, b.test_indices);
}

TEST(Split, IsPartitionAndKeepsRatio) {
  Rng pick(11);
  for (int rep = 0; rep < 30; ++rep) {
    const std::size_t alc = 1 + uniform_index(pick, 12), ctl = 1 + uniform_index(pick, 12);
    const double f = uniform(pick, 0.1, 0.9);
    const auto set = toy_set(alc, ctl, rep);
    const auto r = split_dataset(set, RandomSplit{f}, rep);
    std::vector<std::size_t> all = r.train_indices;
    all.insert(all.end(), r.test_indices.begin(), r.test_indices.end());
    std::sort(all.begin(), all.end());
    ASSERT_EQ(all.size(), set.size());
    for (std::size_t i = 0; i < all.size(); ++i) EXPECT_EQ(all[i], i);
    const double want = f * static_cast<double>(alc);
    EXPECT_LE(std::abs(static_cast<double>(r.train.class_counts().at(Group::alcoholic)) - want), 1.0);
  }
}

TEST(Split, SubjectSplitKeepsSubjectsTogether) {
  const auto set = toy_set(8, 8);
  const auto r = split_dataset(set, SubjectSplit{0.5}, 5);
  std::set<std::string> train_subjects;
  for (const auto& t : r.train.trials()) train_subjects.insert(t.subject_id);
  for (const auto& t : r.test.trials()) EXPECT_EQ(train_subjects.count(t.subject_id), 0u);
}

TEST(Split, GivenLists) {
  Rng rng(2);
  std::vector<Trial> trials;
  std::vector<std::string> prov;
  GivenSplit g;
  for (std::size_t i = 0; i < 960; ++i) {
    Trial t;
    t.subject_id = "s";
    t.group = i % 2 ? Group::alcoholic : Group::control;
    trials.push_back(std::move(t));
    prov.push_back("dir/file" + std::to_string(i));
    (i < 480 ? g.train : g.test).push_back("file" + std::to_string(i));
  }
  const TrialSet set(std::move(trials), std::move(prov));
  const auto r = split_dataset(set, g, 0);
  EXPECT_EQ(r.train.size(), 480u);
  EXPECT_EQ(r.test.size(), 480u);
  g.test.pop_back();
  EXPECT_EQ(error_code_of([&] { split_dataset(set, g, 0); }), ErrorCode::InvalidArgument);
}

TEST(Split, MissingClass) {
  EXPECT_EQ(error_code_of([] { split_dataset(toy_set(4, 0), RandomSplit{0.5}, 0); }),
            ErrorCode::EmptyClass);
}
