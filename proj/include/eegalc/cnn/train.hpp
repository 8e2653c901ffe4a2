#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "eegalc/cnn/network.hpp"
#include "eegalc/error.hpp"
#include "eegalc/features/tensor.hpp"
#include "eegalc/rng.hpp"

namespace eegalc::cnn {

enum class Optimizer { sgd, sgd_momentum, adam };

constexpr std::string_view to_string(Optimizer o) {
  switch (o) {
    case Optimizer::sgd: return "sgd";
    case Optimizer::sgd_momentum: return "sgd_momentum";
    case Optimizer::adam: return "adam";
  }
  return "?";
}

inline Optimizer parse_optimizer(std::string_view s) {
  for (auto o : {Optimizer::sgd, Optimizer::sgd_momentum, Optimizer::adam}) {
    if (to_string(o) == s) return o;
  }
  fail(ErrorCode::ConfigError, "unknown optimizer '" + std::string(s) + "'");
}

struct TrainConfig {
  std::size_t batch_size = 32;
  std::size_t epochs = 50;
  double learning_rate = 1e-3;
  Optimizer optimizer = Optimizer::adam;
  std::uint64_t seed = 0;
  std::optional<std::size_t> patience;  // epochs without val improvement before stopping
  bool stop_on_perfect_val = true;      // a perfect val accuracy cannot improve further

  void validate() const {
    if (batch_size == 0 || epochs == 0) fail(ErrorCode::ConfigError, "batch_size/epochs must be > 0");
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
      fail(ErrorCode::ConfigError, "learning_rate must be finite and >= 0");
    }
    if (patience && *patience == 0) fail(ErrorCode::ConfigError, "patience must be > 0");
  }
};

inline nlohmann::json to_json(const TrainConfig& c) {
  nlohmann::json j = {{"batch_size", c.batch_size}, {"epochs", c.epochs},
                      {"learning_rate", c.learning_rate}, {"optimizer", to_string(c.optimizer)},
                      {"seed", c.seed}, {"stop_on_perfect_val", c.stop_on_perfect_val}};
  j["patience"] = c.patience ? nlohmann::json(*c.patience) : nlohmann::json(nullptr);
  return j;
}

inline TrainConfig train_config_from_json(const nlohmann::json& j) {
  TrainConfig c;
  c.batch_size = j.value("batch_size", c.batch_size);
  c.epochs = j.value("epochs", c.epochs);
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  if (j.contains("optimizer")) c.optimizer = parse_optimizer(j["optimizer"].get<std::string>());
  c.seed = j.value("seed", c.seed);
  if (j.contains("patience") && !j["patience"].is_null()) c.patience = j["patience"].get<std::size_t>();
  c.stop_on_perfect_val = j.value("stop_on_perfect_val", c.stop_on_perfect_val);
  c.validate();
  return c;
}

struct EpochRecord {
  double train_loss = 0.0;
  double train_acc = 0.0;
  double val_acc = 0.0;
  bool operator==(const EpochRecord&) const = default;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;
  bool operator==(const TrainHistory&) const = default;
};

inline std::string history_csv(const TrainHistory& h) {
  std::string out = "epoch,train_loss,train_acc,val_acc\n";
  char buf[128];
  for (std::size_t e = 0; e < h.epochs.size(); ++e) {
    std::snprintf(buf, sizeof buf, "%zu,%.9f,%.6f,%.6f\n", e + 1, h.epochs[e].train_loss,
                  h.epochs[e].train_acc, h.epochs[e].val_acc);
    out += buf;
  }
  return out;
}

/// Samples with integer labels; every sample shares one shape.
struct Dataset {
  Tensor x;
  std::vector<int> y;

  std::size_t size() const { return y.size(); }

  Tensor batch(std::span<const std::size_t> idx) const {
    Tensor b(idx.size(), x.shape);
    const std::size_t s = x.sample_size();
    for (std::size_t i = 0; i < idx.size(); ++i) {
      std::copy(x.sample(idx[i]), x.sample(idx[i]) + s, b.sample(i));
    }
    return b;
  }
};

inline Dataset dataset_from_tensors(const std::vector<FeatureTensor>& tensors) {
  if (tensors.empty()) fail(ErrorCode::EmptySet, "no feature tensors");
  const auto& s = tensors.front().shape;
  Dataset d;
  d.x = Tensor(tensors.size(), Shape3{s[0], s[1], s[2]});
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    if (tensors[i].shape != s) fail(ErrorCode::ShapeMismatch, "mixed feature tensor shapes");
    std::copy(tensors[i].data.begin(), tensors[i].data.end(), d.x.sample(i));
    d.y.push_back(static_cast<int>(tensors[i].label));
  }
  return d;
}

/// Inference-mode argmax labels, evaluated in chunks.
inline std::vector<int> predict_labels(CnnModel& m, const Dataset& d, std::size_t chunk = 32) {
  std::vector<int> out;
  out.reserve(d.size());
  std::vector<std::size_t> idx;
  for (std::size_t b = 0; b < d.size(); b += chunk) {
    idx.resize(std::min(chunk, d.size() - b));
    std::iota(idx.begin(), idx.end(), b);
    const Tensor p = predict_proba(m, d.batch(idx));
    for (std::size_t i = 0; i < p.n; ++i) out.push_back(p.sample(i)[1] > p.sample(i)[0] ? 1 : 0);
  }
  return out;
}

inline double accuracy(CnnModel& m, const Dataset& d) {
  if (d.size() == 0) return 0.0;
  const auto pred = predict_labels(m, d);
  std::size_t ok = 0;
  for (std::size_t i = 0; i < d.size(); ++i) ok += pred[i] == d.y[i];
  return static_cast<double>(ok) / static_cast<double>(d.size());
}

namespace detail {

/// Updates every parameter block in place from its accumulated gradient.
class OptimizerState {
 public:
  OptimizerState(CnnModel& m, const TrainConfig& cfg) : cfg_(cfg) {
    for (auto li : m.parametric_layers()) {
      auto& l = m.layer(li);
      auto ps = l.params();
      auto gs = l.grads();
      for (std::size_t k = 0; k < ps.size(); ++k) {
        params_.push_back(ps[k]);
        grads_.push_back(gs[k]);
        m1_.emplace_back(ps[k]->size(), 0.0);
        m2_.emplace_back(cfg.optimizer == Optimizer::adam ? ps[k]->size() : 0, 0.0);
      }
    }
  }

  void step() {
    ++t_;
    const double lr = cfg_.learning_rate;
    constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8, momentum = 0.9;
    const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t_));
    for (std::size_t b = 0; b < params_.size(); ++b) {
      auto& w = *params_[b];
      const auto& g = *grads_[b];
      auto& m = m1_[b];
      auto& v = m2_[b];
      switch (cfg_.optimizer) {
        case Optimizer::sgd:
          for (std::size_t i = 0; i < w.size(); ++i) w[i] -= lr * g[i];
          break;
        case Optimizer::sgd_momentum:
          for (std::size_t i = 0; i < w.size(); ++i) {
            m[i] = momentum * m[i] + g[i];
            w[i] -= lr * m[i];
          }
          break;
        case Optimizer::adam:
          for (std::size_t i = 0; i < w.size(); ++i) {
            m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
            v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
            w[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps);
          }
          break;
      }
    }
  }

 private:
  TrainConfig cfg_;
  std::vector<std::vector<double>*> params_, grads_;
  std::vector<std::vector<double>> m1_, m2_;
  std::uint64_t t_ = 0;
};

}  // namespace detail

struct TrainResult {
  CnnModel model;
  TrainHistory history;
};

/// Mini-batch training. Batch order for epoch e comes from
/// derive_seed(cfg.seed, e); dropout masks from a generator seeded by the
/// model and config seeds. Returns the weights with the best val accuracy
/// (earliest epoch on ties).
inline TrainResult train(const CnnModel& initial, const Dataset& train_set, const Dataset& val_set,
                         const TrainConfig& cfg) {
  cfg.validate();
  if (train_set.size() == 0 || val_set.size() == 0) fail(ErrorCode::EmptySet, "empty train/val set");
  if (!(train_set.x.shape == initial.input_shape()) || !(val_set.x.shape == initial.input_shape())) {
    fail(ErrorCode::ShapeMismatch, "dataset shape does not match model input");
  }

  CnnModel m = initial;
  detail::OptimizerState opt(m, cfg);
  Rng mask_rng(derive_seed(initial.seed(), derive_seed(cfg.seed, 0x6d61736bULL)));
  TrainHistory hist;
  std::vector<double> best = m.flat_weights();
  double best_val = -1.0;
  std::size_t since_best = 0;

  std::vector<std::size_t> order(train_set.size());
  for (std::size_t e = 0; e < cfg.epochs; ++e) {
    std::iota(order.begin(), order.end(), 0);
    Rng order_rng(derive_seed(cfg.seed, e));
    shuffle(order, order_rng);

    double loss_sum = 0.0;
    for (std::size_t b = 0; b < order.size(); b += cfg.batch_size) {
      const std::size_t len = std::min(cfg.batch_size, order.size() - b);
      const std::span<const std::size_t> idx(order.data() + b, len);
      const Tensor xb = train_set.batch(idx);
      std::vector<int> yb(len);
      for (std::size_t i = 0; i < len; ++i) yb[i] = train_set.y[idx[i]];
      const auto masks = m.draw_masks(len, mask_rng);
      m.set_mode(Mode::train);
      m.zero_grad();
      const Tensor probs = m.forward(xb, &masks);
      const auto lg = cross_entropy(probs, yb);
      m.backward(lg.grad_logits);
      opt.step();
      loss_sum += lg.loss * static_cast<double>(len);
    }
    m.set_mode(Mode::infer);

    EpochRecord rec;
    rec.train_loss = loss_sum / static_cast<double>(train_set.size());
    rec.train_acc = accuracy(m, train_set);
    rec.val_acc = &val_set == &train_set ? rec.train_acc : accuracy(m, val_set);
    hist.epochs.push_back(rec);

    if (rec.val_acc > best_val) {
      best_val = rec.val_acc;
      best = m.flat_weights();
      hist.best_epoch = e;
      since_best = 0;
    } else {
      ++since_best;
    }
    if (cfg.patience && since_best >= *cfg.patience) break;
    if (cfg.stop_on_perfect_val && rec.val_acc == 1.0) break;
  }
  m.set_flat_weights(best);
  m.set_mode(Mode::infer);
  return {std::move(m), std::move(hist)};
}

}  // namespace eegalc::cnn
