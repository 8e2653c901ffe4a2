#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "eegalc/cnn/tensor.hpp"
#include "eegalc/error.hpp"
#include "eegalc/rng.hpp"

namespace eegalc::cnn {

enum class LayerKind { conv, maxpool, relu, dropout, flatten, dense, softmax };

constexpr std::string_view to_string(LayerKind k) {
  switch (k) {
    case LayerKind::conv: return "conv";
    case LayerKind::maxpool: return "maxpool";
    case LayerKind::relu: return "relu";
    case LayerKind::dropout: return "dropout";
    case LayerKind::flatten: return "flatten";
    case LayerKind::dense: return "dense";
    case LayerKind::softmax: return "softmax";
  }
  return "?";
}

inline LayerKind parse_layer_kind(std::string_view s) {
  for (auto k : {LayerKind::conv, LayerKind::maxpool, LayerKind::relu, LayerKind::dropout,
                 LayerKind::flatten, LayerKind::dense, LayerKind::softmax}) {
    if (to_string(k) == s) return k;
  }
  fail(ErrorCode::InvalidArgument, "unknown layer kind '" + std::string(s) + "'");
}

struct LayerSpec {
  LayerKind kind = LayerKind::relu;
  // conv
  std::size_t out_channels = 0;
  std::size_t kernel_h = 3, kernel_w = 3;
  std::size_t stride = 1;
  std::size_t padding = 1;
  // maxpool
  std::size_t window = 2;
  // dropout
  double rate = 0.0;
  // dense
  std::size_t units = 0;

  static LayerSpec conv(std::size_t out, std::size_t k = 3, std::size_t stride = 1,
                        std::size_t pad = 1) {
    LayerSpec s;
    s.kind = LayerKind::conv;
    s.out_channels = out;
    s.kernel_h = s.kernel_w = k;
    s.stride = stride;
    s.padding = pad;
    return s;
  }
  static LayerSpec maxpool(std::size_t window = 2, std::size_t stride = 2) {
    LayerSpec s;
    s.kind = LayerKind::maxpool;
    s.window = window;
    s.stride = stride;
    return s;
  }
  static LayerSpec relu() { return LayerSpec{}; }
  static LayerSpec dropout(double rate) {
    LayerSpec s;
    s.kind = LayerKind::dropout;
    s.rate = rate;
    return s;
  }
  static LayerSpec flatten() {
    LayerSpec s;
    s.kind = LayerKind::flatten;
    return s;
  }
  static LayerSpec dense(std::size_t units) {
    LayerSpec s;
    s.kind = LayerKind::dense;
    s.units = units;
    return s;
  }
  static LayerSpec softmax() {
    LayerSpec s;
    s.kind = LayerKind::softmax;
    return s;
  }
};

inline nlohmann::json to_json(const LayerSpec& s) {
  nlohmann::json j = {{"kind", to_string(s.kind)}};
  switch (s.kind) {
    case LayerKind::conv:
      j["out_channels"] = s.out_channels;
      j["kernel"] = {s.kernel_h, s.kernel_w};
      j["stride"] = s.stride;
      j["padding"] = s.padding;
      break;
    case LayerKind::maxpool:
      j["window"] = s.window;
      j["stride"] = s.stride;
      break;
    case LayerKind::dropout: j["rate"] = s.rate; break;
    case LayerKind::dense: j["units"] = s.units; break;
    default: break;
  }
  return j;
}

inline LayerSpec layer_spec_from_json(const nlohmann::json& j) {
  LayerSpec s;
  s.kind = parse_layer_kind(j.at("kind").get<std::string>());
  switch (s.kind) {
    case LayerKind::conv:
      s.out_channels = j.at("out_channels").get<std::size_t>();
      s.kernel_h = j.at("kernel").at(0).get<std::size_t>();
      s.kernel_w = j.at("kernel").at(1).get<std::size_t>();
      s.stride = j.value("stride", std::size_t{1});
      s.padding = j.value("padding", std::size_t{0});
      break;
    case LayerKind::maxpool:
      s.window = j.value("window", std::size_t{2});
      s.stride = j.value("stride", std::size_t{2});
      break;
    case LayerKind::dropout: s.rate = j.at("rate").get<double>(); break;
    case LayerKind::dense: s.units = j.at("units").get<std::size_t>(); break;
    default: break;
  }
  return s;
}

/// Dropout keep-masks, one per dropout layer, each scaled by 1/(1-rate).
using DropoutMasks = std::vector<std::vector<double>>;

enum class Mode { train, infer };

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using CMapMat = Eigen::Map<const RowMat>;

/// Base layer. forward() caches what backward() needs; backward() accumulates
/// parameter gradients and returns the input gradient.
class Layer {
 public:
  explicit Layer(LayerSpec spec) : spec_(spec) {}
  virtual ~Layer() = default;

  const LayerSpec& spec() const { return spec_; }
  const Shape3& in_shape() const { return in_; }
  const Shape3& out_shape() const { return out_; }

  virtual Tensor forward(const Tensor& x, Mode mode) = 0;
  virtual Tensor backward(const Tensor& grad_out) = 0;

  /// Parameter blocks (weights then bias) and their gradients.
  virtual std::vector<std::vector<double>*> params() { return {}; }
  virtual std::vector<std::vector<double>*> grads() { return {}; }
  std::size_t param_count() {
    std::size_t n = 0;
    for (auto* p : params()) n += p->size();
    return n;
  }
  void zero_grad() {
    for (auto* g : grads()) std::fill(g->begin(), g->end(), 0.0);
  }

  /// Hash of the piecewise-linear branch taken on the last forward pass
  /// (ReLU signs, pool winners); 0 for smooth layers.
  virtual std::uint64_t branch_signature() const { return 0; }

 protected:
  void check_input(const Tensor& x) const {
    if (!(x.shape == in_)) {
      fail(ErrorCode::ShapeMismatch,
           std::string(to_string(spec_.kind)) + " expects " + in_.str() + ", got " + x.shape.str());
    }
  }

  LayerSpec spec_;
  Shape3 in_, out_;
};

class Conv2D final : public Layer {
 public:
  Conv2D(LayerSpec spec, Shape3 in) : Layer(spec) {
    in_ = in;
    if (spec.stride == 0 || spec.out_channels == 0 || spec.kernel_h == 0 || spec.kernel_w == 0) {
      fail(ErrorCode::InvalidArgument, "conv parameters must be positive");
    }
    const long oh = (static_cast<long>(in.h) + 2 * static_cast<long>(spec.padding) -
                     static_cast<long>(spec.kernel_h)) / static_cast<long>(spec.stride) + 1;
    const long ow = (static_cast<long>(in.w) + 2 * static_cast<long>(spec.padding) -
                     static_cast<long>(spec.kernel_w)) / static_cast<long>(spec.stride) + 1;
    if (oh <= 0 || ow <= 0) fail(ErrorCode::InputTooSmall, "conv output would be empty");
    out_ = {spec.out_channels, static_cast<std::size_t>(oh), static_cast<std::size_t>(ow)};
    patch_ = in.c * spec.kernel_h * spec.kernel_w;
    w_.assign(spec.out_channels * patch_, 0.0);
    b_.assign(spec.out_channels, 0.0);
    gw_.assign(w_.size(), 0.0);
    gb_.assign(b_.size(), 0.0);
  }

  std::size_t fan_in() const { return patch_; }

  Tensor forward(const Tensor& x, Mode) override {
    check_input(x);
    input_ = x;
    Tensor y(x.n, out_);
    const std::size_t hw = out_.h * out_.w;
    col_.resize(patch_ * hw);
    CMapMat w(w_.data(), static_cast<Eigen::Index>(out_.c), static_cast<Eigen::Index>(patch_));
    for (std::size_t i = 0; i < x.n; ++i) {
      im2col(x.sample(i));
      CMapMat col(col_.data(), static_cast<Eigen::Index>(patch_), static_cast<Eigen::Index>(hw));
      MapMat out(y.sample(i), static_cast<Eigen::Index>(out_.c), static_cast<Eigen::Index>(hw));
      out.noalias() = w * col;
      for (std::size_t c = 0; c < out_.c; ++c) out.row(static_cast<Eigen::Index>(c)).array() += b_[c];
    }
    return y;
  }

  Tensor backward(const Tensor& g) override {
    Tensor dx(g.n, in_);
    const std::size_t hw = out_.h * out_.w;
    CMapMat w(w_.data(), static_cast<Eigen::Index>(out_.c), static_cast<Eigen::Index>(patch_));
    MapMat gw(gw_.data(), static_cast<Eigen::Index>(out_.c), static_cast<Eigen::Index>(patch_));
    col_.resize(patch_ * hw);
    dcol_.resize(patch_ * hw);
    for (std::size_t i = 0; i < g.n; ++i) {
      im2col(input_.sample(i));
      CMapMat col(col_.data(), static_cast<Eigen::Index>(patch_), static_cast<Eigen::Index>(hw));
      CMapMat go(g.sample(i), static_cast<Eigen::Index>(out_.c), static_cast<Eigen::Index>(hw));
      gw.noalias() += go * col.transpose();
      for (std::size_t c = 0; c < out_.c; ++c) gb_[c] += go.row(static_cast<Eigen::Index>(c)).sum();
      MapMat dcol(dcol_.data(), static_cast<Eigen::Index>(patch_), static_cast<Eigen::Index>(hw));
      dcol.noalias() = w.transpose() * go;
      col2im(dx.sample(i));
    }
    return dx;
  }

  std::vector<std::vector<double>*> params() override { return {&w_, &b_}; }
  std::vector<std::vector<double>*> grads() override { return {&gw_, &gb_}; }

 private:
  // Rows are (channel, ky, kx); columns are output positions.
  void im2col(const double* src) {
    const std::size_t kh = spec_.kernel_h, kw = spec_.kernel_w, st = spec_.stride;
    const long pad = static_cast<long>(spec_.padding);
    const std::size_t hw = out_.h * out_.w;
    std::size_t row = 0;
    for (std::size_t c = 0; c < in_.c; ++c) {
      const double* plane = src + c * in_.h * in_.w;
      for (std::size_t ky = 0; ky < kh; ++ky) {
        for (std::size_t kx = 0; kx < kw; ++kx, ++row) {
          double* dst = col_.data() + row * hw;
          for (std::size_t oy = 0; oy < out_.h; ++oy) {
            const long iy = static_cast<long>(oy * st + ky) - pad;
            double* drow = dst + oy * out_.w;
            if (iy < 0 || iy >= static_cast<long>(in_.h)) {
              std::fill(drow, drow + out_.w, 0.0);
              continue;
            }
            const double* srow = plane + static_cast<std::size_t>(iy) * in_.w;
            for (std::size_t ox = 0; ox < out_.w; ++ox) {
              const long ix = static_cast<long>(ox * st + kx) - pad;
              drow[ox] = (ix < 0 || ix >= static_cast<long>(in_.w)) ? 0.0
                                                                     : srow[static_cast<std::size_t>(ix)];
            }
          }
        }
      }
    }
  }

  void col2im(double* dst) const {
    const std::size_t kh = spec_.kernel_h, kw = spec_.kernel_w, st = spec_.stride;
    const long pad = static_cast<long>(spec_.padding);
    const std::size_t hw = out_.h * out_.w;
    std::size_t row = 0;
    for (std::size_t c = 0; c < in_.c; ++c) {
      double* plane = dst + c * in_.h * in_.w;
      for (std::size_t ky = 0; ky < kh; ++ky) {
        for (std::size_t kx = 0; kx < kw; ++kx, ++row) {
          const double* srcc = dcol_.data() + row * hw;
          for (std::size_t oy = 0; oy < out_.h; ++oy) {
            const long iy = static_cast<long>(oy * st + ky) - pad;
            if (iy < 0 || iy >= static_cast<long>(in_.h)) continue;
            double* drow = plane + static_cast<std::size_t>(iy) * in_.w;
            const double* srow = srcc + oy * out_.w;
            for (std::size_t ox = 0; ox < out_.w; ++ox) {
              const long ix = static_cast<long>(ox * st + kx) - pad;
              if (ix >= 0 && ix < static_cast<long>(in_.w)) drow[ix] += srow[ox];
            }
          }
        }
      }
    }
  }

  std::size_t patch_ = 0;
  std::vector<double> w_, b_, gw_, gb_;
  Tensor input_;
  std::vector<double> col_, dcol_;
};

class MaxPool2D final : public Layer {
 public:
  MaxPool2D(LayerSpec spec, Shape3 in) : Layer(spec) {
    in_ = in;
    if (spec.window == 0 || spec.stride == 0) fail(ErrorCode::InvalidArgument, "pool parameters");
    if (in.h < spec.window || in.w < spec.window) fail(ErrorCode::InputTooSmall, "pool window");
    out_ = {in.c, (in.h - spec.window) / spec.stride + 1, (in.w - spec.window) / spec.stride + 1};
  }

  Tensor forward(const Tensor& x, Mode) override {
    check_input(x);
    Tensor y(x.n, out_);
    argmax_.assign(y.data.size(), 0);
    std::size_t o = 0;
    for (std::size_t i = 0; i < x.n; ++i) {
      for (std::size_t c = 0; c < in_.c; ++c) {
        const std::size_t base = (i * in_.c + c) * in_.h * in_.w;
        for (std::size_t oy = 0; oy < out_.h; ++oy) {
          for (std::size_t ox = 0; ox < out_.w; ++ox, ++o) {
            double best = -std::numeric_limits<double>::infinity();
            std::size_t arg = 0;
            for (std::size_t ky = 0; ky < spec_.window; ++ky) {
              for (std::size_t kx = 0; kx < spec_.window; ++kx) {
                const std::size_t idx =
                    base + (oy * spec_.stride + ky) * in_.w + ox * spec_.stride + kx;
                if (x.data[idx] > best) {
                  best = x.data[idx];
                  arg = idx;
                }
              }
            }
            y.data[o] = best;
            argmax_[o] = arg;
          }
        }
      }
    }
    batch_ = x.n;
    return y;
  }

  Tensor backward(const Tensor& g) override {
    Tensor dx(batch_, in_);
    for (std::size_t o = 0; o < g.data.size(); ++o) dx.data[argmax_[o]] += g.data[o];
    return dx;
  }

  std::uint64_t branch_signature() const override {
    std::uint64_t h = 0x9e3779b97f4a7c15ULL;
    for (auto a : argmax_) h = mix_seed(h ^ a);
    return h;
  }

 private:
  std::vector<std::size_t> argmax_;
  std::size_t batch_ = 0;
};

/// max(0, x); the subgradient at 0 is 0.
class Relu final : public Layer {
 public:
  Relu(LayerSpec spec, Shape3 in) : Layer(spec) { in_ = out_ = in; }

  Tensor forward(const Tensor& x, Mode) override {
    check_input(x);
    Tensor y = x;
    mask_.resize(x.data.size());
    for (std::size_t i = 0; i < y.data.size(); ++i) {
      mask_[i] = y.data[i] > 0.0;
      if (!mask_[i]) y.data[i] = 0.0;
    }
    return y;
  }

  Tensor backward(const Tensor& g) override {
    Tensor dx = g;
    for (std::size_t i = 0; i < dx.data.size(); ++i) {
      if (!mask_[i]) dx.data[i] = 0.0;
    }
    return dx;
  }

  std::uint64_t branch_signature() const override {
    std::uint64_t h = 0x9e3779b97f4a7c15ULL, word = 0;
    for (std::size_t i = 0; i < mask_.size(); ++i) {
      word = (word << 1) | static_cast<std::uint64_t>(mask_[i]);
      if (i % 64 == 63) h = mix_seed(h ^ word), word = 0;
    }
    return mix_seed(h ^ word ^ mask_.size());
  }

 private:
  std::vector<char> mask_;
};

/// Inverted dropout. The mask is set by the network before a train-mode pass.
class Dropout final : public Layer {
 public:
  Dropout(LayerSpec spec, Shape3 in) : Layer(spec) {
    in_ = out_ = in;
    if (!(spec.rate >= 0.0 && spec.rate < 1.0)) {
      fail(ErrorCode::InvalidArgument, "dropout rate must be in [0,1)");
    }
  }

  double rate() const { return spec_.rate; }

  std::vector<double> draw_mask(std::size_t batch, Rng& rng) const {
    std::vector<double> m(batch * in_.size());
    const double keep = 1.0 - spec_.rate;
    const double scale = 1.0 / keep;
    for (auto& v : m) v = uniform01(rng) < keep ? scale : 0.0;
    return m;
  }

  void set_mask(const std::vector<double>* mask) { mask_ = mask; }

  Tensor forward(const Tensor& x, Mode mode) override {
    check_input(x);
    active_ = mode == Mode::train && spec_.rate > 0.0;
    if (!active_) return x;
    if (mask_ == nullptr || mask_->size() != x.data.size()) {
      fail(ErrorCode::ShapeMismatch, "dropout mask missing or wrong size");
    }
    Tensor y = x;
    for (std::size_t i = 0; i < y.data.size(); ++i) y.data[i] *= (*mask_)[i];
    return y;
  }

  Tensor backward(const Tensor& g) override {
    if (!active_) return g;
    Tensor dx = g;
    for (std::size_t i = 0; i < dx.data.size(); ++i) dx.data[i] *= (*mask_)[i];
    return dx;
  }

 private:
  const std::vector<double>* mask_ = nullptr;
  bool active_ = false;
};

class Flatten final : public Layer {
 public:
  Flatten(LayerSpec spec, Shape3 in) : Layer(spec) {
    in_ = in;
    out_ = {1, 1, in.size()};
  }
  Tensor forward(const Tensor& x, Mode) override {
    check_input(x);
    Tensor y = x;
    y.shape = out_;
    return y;
  }
  Tensor backward(const Tensor& g) override {
    Tensor dx = g;
    dx.shape = in_;
    return dx;
  }
};

/// y = W x + b with W stored (units, inputs) row-major.
class Dense final : public Layer {
 public:
  Dense(LayerSpec spec, Shape3 in) : Layer(spec) {
    in_ = in;
    if (spec.units == 0) fail(ErrorCode::InvalidArgument, "dense units must be positive");
    out_ = {1, 1, spec.units};
    w_.assign(spec.units * in.size(), 0.0);
    b_.assign(spec.units, 0.0);
    gw_.assign(w_.size(), 0.0);
    gb_.assign(b_.size(), 0.0);
  }

  std::size_t fan_in() const { return in_.size(); }

  Tensor forward(const Tensor& x, Mode) override {
    check_input(x);
    input_ = x;
    Tensor y(x.n, out_);
    const auto n = static_cast<Eigen::Index>(x.n);
    const auto d = static_cast<Eigen::Index>(in_.size());
    const auto u = static_cast<Eigen::Index>(out_.w);
    CMapMat xm(x.data.data(), n, d);
    CMapMat w(w_.data(), u, d);
    MapMat ym(y.data.data(), n, u);
    ym.noalias() = xm * w.transpose();
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < u; ++j) ym(i, j) += b_[static_cast<std::size_t>(j)];
    }
    return y;
  }

  Tensor backward(const Tensor& g) override {
    const auto n = static_cast<Eigen::Index>(g.n);
    const auto d = static_cast<Eigen::Index>(in_.size());
    const auto u = static_cast<Eigen::Index>(out_.w);
    CMapMat gm(g.data.data(), n, u);
    CMapMat xm(input_.data.data(), n, d);
    CMapMat w(w_.data(), u, d);
    MapMat gw(gw_.data(), u, d);
    gw.noalias() += gm.transpose() * xm;
    for (Eigen::Index j = 0; j < u; ++j) gb_[static_cast<std::size_t>(j)] += gm.col(j).sum();
    Tensor dx(g.n, in_);
    MapMat dxm(dx.data.data(), n, d);
    dxm.noalias() = gm * w;
    return dx;
  }

  std::vector<std::vector<double>*> params() override { return {&w_, &b_}; }
  std::vector<std::vector<double>*> grads() override { return {&gw_, &gb_}; }

 private:
  std::vector<double> w_, b_, gw_, gb_;
  Tensor input_;
};

/// Row-wise softmax with max subtraction. backward() expects the gradient
/// with respect to the logits (cross-entropy is fused in the network).
class Softmax final : public Layer {
 public:
  Softmax(LayerSpec spec, Shape3 in) : Layer(spec) {
    in_ = out_ = in;
  }
  Tensor forward(const Tensor& x, Mode) override {
    check_input(x);
    Tensor y = x;
    const std::size_t k = in_.size();
    for (std::size_t i = 0; i < x.n; ++i) {
      double* row = y.sample(i);
      const double mx = *std::max_element(row, row + k);
      double sum = 0.0;
      for (std::size_t j = 0; j < k; ++j) {
        row[j] = std::exp(row[j] - mx);
        sum += row[j];
      }
      for (std::size_t j = 0; j < k; ++j) row[j] /= sum;
    }
    return y;
  }
  Tensor backward(const Tensor& g) override { return g; }
};

inline std::unique_ptr<Layer> make_layer(const LayerSpec& spec, Shape3 in) {
  switch (spec.kind) {
    case LayerKind::conv: return std::make_unique<Conv2D>(spec, in);
    case LayerKind::maxpool: return std::make_unique<MaxPool2D>(spec, in);
    case LayerKind::relu: return std::make_unique<Relu>(spec, in);
    case LayerKind::dropout: return std::make_unique<Dropout>(spec, in);
    case LayerKind::flatten: return std::make_unique<Flatten>(spec, in);
    case LayerKind::dense: return std::make_unique<Dense>(spec, in);
    case LayerKind::softmax: return std::make_unique<Softmax>(spec, in);
  }
  fail(ErrorCode::InvalidArgument, "unknown layer kind");
}

}  // namespace eegalc::cnn
