#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "eegalc/cnn/layers.hpp"
#include "eegalc/cnn/tensor.hpp"
#include "eegalc/error.hpp"
#include "eegalc/rng.hpp"

namespace eegalc::cnn {

/// Layer stack with parameters. Copyable (deep copy of parameters).
class CnnModel {
 public:
  CnnModel(Shape3 input, std::vector<LayerSpec> specs, std::uint64_t seed)
      : input_(input), specs_(std::move(specs)), seed_(seed) {
    build_layers();
    init_weights();
  }

  CnnModel(const CnnModel& o) : input_(o.input_), specs_(o.specs_), seed_(o.seed_), mode_(o.mode_) {
    build_layers();
    set_flat_weights(o.flat_weights());
  }
  CnnModel& operator=(const CnnModel& o) {
    if (this != &o) {
      CnnModel tmp(o);
      *this = std::move(tmp);
    }
    return *this;
  }
  CnnModel(CnnModel&&) = default;
  CnnModel& operator=(CnnModel&&) = default;

  const Shape3& input_shape() const { return input_; }
  const std::vector<LayerSpec>& specs() const { return specs_; }
  std::uint64_t seed() const { return seed_; }
  Mode mode() const { return mode_; }
  void set_mode(Mode m) { mode_ = m; }

  std::size_t layer_count() const { return layers_.size(); }
  Layer& layer(std::size_t i) { return *layers_[i]; }
  const Layer& layer(std::size_t i) const { return *layers_[i]; }

  std::size_t count(LayerKind k) const {
    std::size_t n = 0;
    for (const auto& s : specs_) n += s.kind == k;
    return n;
  }

  /// Indices of layers that own parameters (conv, dense).
  std::vector<std::size_t> parametric_layers() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < specs_.size(); ++i) {
      if (specs_[i].kind == LayerKind::conv || specs_[i].kind == LayerKind::dense) out.push_back(i);
    }
    return out;
  }

  std::size_t param_count() const {
    std::size_t n = 0;
    for (const auto& l : layers_) n += l->param_count();
    return n;
  }

  std::vector<double> flat_weights() const {
    std::vector<double> out;
    out.reserve(param_count());
    for (const auto& l : layers_) {
      for (auto* p : l->params()) out.insert(out.end(), p->begin(), p->end());
    }
    return out;
  }

  void set_flat_weights(std::span<const double> w) {
    if (w.size() != param_count()) fail(ErrorCode::ShapeMismatch, "weight vector length");
    std::size_t at = 0;
    for (auto& l : layers_) {
      for (auto* p : l->params()) {
        std::copy(w.begin() + static_cast<std::ptrdiff_t>(at),
                  w.begin() + static_cast<std::ptrdiff_t>(at + p->size()), p->begin());
        at += p->size();
      }
    }
  }

  std::vector<double> flat_grads() const {
    std::vector<double> out;
    out.reserve(param_count());
    for (const auto& l : layers_) {
      for (auto* g : l->grads()) out.insert(out.end(), g->begin(), g->end());
    }
    return out;
  }

  void zero_grad() {
    for (auto& l : layers_) l->zero_grad();
  }

  /// One mask per dropout layer for a batch of `batch` samples.
  DropoutMasks draw_masks(std::size_t batch, Rng& rng) const {
    DropoutMasks masks;
    for (const auto& l : layers_) {
      if (const auto* d = dynamic_cast<const Dropout*>(l.get())) masks.push_back(d->draw_mask(batch, rng));
    }
    return masks;
  }

  /// Class probabilities (n, 2). Train mode requires masks from draw_masks().
  Tensor forward(const Tensor& x, const DropoutMasks* masks = nullptr) {
    return forward_range(x, 0, masks);
  }

  /// Runs layers [first, end) on an activation that is the input of layer `first`.
  Tensor forward_range(const Tensor& x, std::size_t first, const DropoutMasks* masks = nullptr) {
    if (first == 0 && !(x.shape == input_)) {
      fail(ErrorCode::ShapeMismatch, "model expects " + input_.str() + ", got " + x.shape.str());
    }
    bind_masks(masks);
    Tensor a = x;
    for (std::size_t i = first; i < layers_.size(); ++i) a = layers_[i]->forward(a, mode_);
    return a;
  }

  /// Like forward() but also returns every intermediate activation:
  /// acts[i] is the input of layer i, acts.back() the output.
  std::vector<Tensor> forward_trace(const Tensor& x, const DropoutMasks* masks = nullptr) {
    if (!(x.shape == input_)) fail(ErrorCode::ShapeMismatch, "model input shape");
    bind_masks(masks);
    std::vector<Tensor> acts{x};
    for (auto& l : layers_) acts.push_back(l->forward(acts.back(), mode_));
    return acts;
  }

  /// Backpropagates d(loss)/d(logits) from the softmax down; accumulates grads.
  /// Combined branch signature of layers [first, end) from the last pass.
  std::uint64_t branch_signature(std::size_t first = 0) const {
    std::uint64_t h = 0;
    for (std::size_t i = first; i < layers_.size(); ++i) h = mix_seed(h ^ layers_[i]->branch_signature());
    return h;
  }

  void backward(const Tensor& grad_logits) {
    Tensor g = grad_logits;
    for (std::size_t i = layers_.size(); i-- > 0;) g = layers_[i]->backward(g);
  }

 private:
  void build_layers() {
    layers_.clear();
    Shape3 s = input_;
    for (const auto& spec : specs_) {
      layers_.push_back(make_layer(spec, s));
      s = layers_.back()->out_shape();
    }
    if (specs_.empty() || specs_.back().kind != LayerKind::softmax) {
      fail(ErrorCode::InvalidArgument, "softmax must be the terminal layer");
    }
    for (std::size_t i = 0; i + 1 < specs_.size(); ++i) {
      if (specs_[i].kind == LayerKind::softmax) {
        fail(ErrorCode::InvalidArgument, "softmax must be the terminal layer");
      }
    }
    if (s.size() != 2) fail(ErrorCode::InvalidArgument, "final layer must produce 2 outputs");
  }

  /// He-uniform: U(-sqrt(6/fan_in), sqrt(6/fan_in)); biases zero.
  void init_weights() {
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      std::size_t fan_in = 0;
      if (auto* c = dynamic_cast<Conv2D*>(layers_[i].get())) fan_in = c->fan_in();
      if (auto* d = dynamic_cast<Dense*>(layers_[i].get())) fan_in = d->fan_in();
      if (fan_in == 0) continue;
      Rng rng(derive_seed(seed_, i));
      const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
      auto ps = layers_[i]->params();
      for (auto& w : *ps[0]) w = uniform(rng, -limit, limit);
      std::fill(ps[1]->begin(), ps[1]->end(), 0.0);
    }
  }

  void bind_masks(const DropoutMasks* masks) {
    std::size_t k = 0;
    for (auto& l : layers_) {
      if (auto* d = dynamic_cast<Dropout*>(l.get())) {
        d->set_mask(masks != nullptr && k < masks->size() ? &(*masks)[k] : nullptr);
        ++k;
      }
    }
  }

  Shape3 input_;
  std::vector<LayerSpec> specs_;
  std::uint64_t seed_ = 0;
  Mode mode_ = Mode::infer;
  std::vector<std::unique_ptr<Layer>> layers_;
};

/// conv16-conv16-pool-drop(.25)-conv32-conv32-pool-drop(.25)-conv64-conv64-
/// flatten-dense128-relu-drop(.5)-dense2-softmax, ReLU after every conv,
/// 3x3 same-padded convolutions and 2x2/2 pooling.
inline std::vector<LayerSpec> default_layer_specs(std::size_t f1 = 16, std::size_t f2 = 32,
                                                  std::size_t f3 = 64, std::size_t dense = 128) {
  using S = LayerSpec;
  return {S::conv(f1), S::relu(),        S::conv(f1), S::relu(),       S::maxpool(),
          S::dropout(0.25), S::conv(f2), S::relu(),   S::conv(f2),     S::relu(),
          S::maxpool(), S::dropout(0.25), S::conv(f3), S::relu(),      S::conv(f3),
          S::relu(),    S::flatten(),     S::dense(dense), S::relu(),  S::dropout(0.5),
          S::dense(2),  S::softmax()};
}

inline CnnModel build_default(Shape3 input, std::uint64_t seed = 0) {
  if (input.h < 16 || input.w < 16) fail(ErrorCode::InputTooSmall, "input must be at least 16x16");
  if (input.c == 0) fail(ErrorCode::InputTooSmall, "input needs at least one channel");
  return CnnModel(input, default_layer_specs(), seed);
}

/// Mean cross-entropy of probabilities against integer labels, with the
/// gradient with respect to the logits: (p - onehot) / n.
struct LossGrad {
  double loss = 0.0;
  Tensor grad_logits;
};

inline LossGrad cross_entropy(const Tensor& probs, std::span<const int> labels) {
  if (labels.size() != probs.n || probs.sample_size() != 2) {
    fail(ErrorCode::ShapeMismatch, "labels do not match probabilities");
  }
  LossGrad r;
  r.grad_logits = probs;
  const double inv = 1.0 / static_cast<double>(probs.n);
  for (std::size_t i = 0; i < probs.n; ++i) {
    const int y = labels[i];
    if (y != 0 && y != 1) fail(ErrorCode::InvalidArgument, "label must be 0 or 1");
    const double p = probs.sample(i)[y];
    r.loss -= std::log(std::max(p, 1e-300));
    double* g = r.grad_logits.sample(i);
    g[y] -= 1.0;
    g[0] *= inv;
    g[1] *= inv;
  }
  r.loss *= inv;
  return r;
}

/// Parameter gradients in flat_weights() order.
struct Gradients {
  double loss = 0.0;
  std::vector<double> flat;
};

/// Train-mode forward/backward with the given (frozen) dropout masks.
inline Gradients loss_and_grad(CnnModel& m, const Tensor& batch, std::span<const int> labels,
                               const DropoutMasks& masks) {
  const Mode prev = m.mode();
  m.set_mode(Mode::train);
  m.zero_grad();
  const Tensor probs = m.forward(batch, &masks);
  auto lg = cross_entropy(probs, labels);
  m.backward(lg.grad_logits);
  m.set_mode(prev);
  return {lg.loss, m.flat_grads()};
}

/// Draws fresh masks from `rng` then delegates.
inline Gradients loss_and_grad(CnnModel& m, const Tensor& batch, std::span<const int> labels,
                               Rng& rng) {
  const auto masks = m.draw_masks(batch.n, rng);
  return loss_and_grad(m, batch, labels, masks);
}

/// Inference-mode probabilities.
inline Tensor predict_proba(CnnModel& m, const Tensor& batch) {
  const Mode prev = m.mode();
  m.set_mode(Mode::infer);
  Tensor p = m.forward(batch);
  m.set_mode(prev);
  return p;
}

}  // namespace eegalc::cnn
