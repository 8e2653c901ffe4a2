// Library walk-through on a synthetic corpus: preprocess, correlation
// features, a stratified split, then CART and a small CNN.

#include <cstdio>

#include "eegalc.hpp"

using namespace eegalc;

int main() {
  const TrialSet raw = harness::synthetic_dataset({.subjects_per_group = 4, .trials_per_subject = 6, .seed = 3});

  DspConfig dsp;
  dsp.pca = FrontalLoading{};
  const TrialSet clean = harness::preprocess(raw, dsp);

  const auto split = split_dataset(clean, RandomSplit{0.5}, 17);
  const auto train = harness::build_tensors(split.train, FeatureKind::correlation, dsp);
  const auto test = harness::build_tensors(split.test, FeatureKind::correlation, dsp);

  std::printf("most correlated pairs, alcoholic training trials:\n");
  const auto corr = mean_correlation(split.train, Group::alcoholic);
  for (const auto& p : top_correlated_pairs(corr, 5)) std::printf("%-4s %-4s %.3f\n", p.a.c_str(), p.b.c_str(), p.value);

  const ml::ClassifierSpec cart{ml::ClassifierKind::cart, {{"max_depth", 4}}, 5};
  const auto train_v = ml::from_tensors(train);
  const auto test_v = ml::from_tensors(test);
  const auto tree = ml::fit(cart, train_v);
  const auto rep = ml::evaluate(*tree, test_v, &train_v);
  std::printf("cart: test %.3f, train %.3f\n", rep.accuracy, rep.train_accuracy);

  cnn::TrainConfig tc;
  tc.epochs = 10;
  tc.batch_size = 8;
  tc.seed = 5;
  const auto train_d = cnn::dataset_from_tensors(train);
  const auto test_d = cnn::dataset_from_tensors(test);
  // model selection on the training side keeps the test side untouched
  auto res = cnn::train(cnn::build_default(train_d.x.shape, 5), train_d, train_d, tc);
  std::printf("cnn: test %.3f after %zu epochs\n", cnn::accuracy(res.model, test_d), res.history.epochs.size());
}
