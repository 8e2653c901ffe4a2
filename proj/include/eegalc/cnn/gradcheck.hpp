#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "eegalc/cnn/network.hpp"
#include "eegalc/error.hpp"
#include "eegalc/rng.hpp"

namespace eegalc::cnn {

struct GradCheckOptions {
  double epsilon = 1e-5;
  std::size_t samples_per_layer = 0;  // 0: every parameter
  std::uint64_t seed = 0;             // selects sampled parameters
  std::size_t max_shrinks = 6;        // epsilon /= 10 per retry on a kink crossing
};

struct LayerGradError {
  std::size_t layer_index = 0;
  LayerKind kind = LayerKind::conv;
  std::size_t checked = 0;
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  std::size_t shrunk = 0;      // stencils narrowed to avoid a ReLU/pool kink
  std::size_t unresolved = 0;  // still crossing a kink after max_shrinks
};

/// |a - n| / max(|a|, |n|, 1e-12)
inline double relative_error(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-12});
  return std::abs(analytic - numeric) / denom;
}

/// Central finite differences against backprop for every parametric layer,
/// with the dropout masks held fixed. Layers before the perturbed one are not
/// re-run. The loss is only piecewise smooth: when either side of the stencil
/// lands on a different ReLU/max-pool branch than the unperturbed point, the
/// difference quotient straddles a kink and is not a derivative estimate, so
/// epsilon is narrowed until both sides stay on the same branch.
inline std::vector<LayerGradError> grad_check(CnnModel& m, const Tensor& batch,
                                              std::span<const int> labels,
                                              const DropoutMasks& masks,
                                              const GradCheckOptions& opts = {}) {
  if (!(opts.epsilon > 0.0)) fail(ErrorCode::InvalidEpsilon, "epsilon must be > 0");
  const Mode prev = m.mode();
  loss_and_grad(m, batch, labels, masks);

  m.set_mode(Mode::train);
  const auto acts = m.forward_trace(batch, &masks);
  Rng rng(opts.seed);
  std::vector<LayerGradError> report;

  auto loss_from = [&](std::size_t layer, std::uint64_t& sig) {
    const Tensor probs = m.forward_range(acts[layer], layer, &masks);
    sig = m.branch_signature(layer);
    return cross_entropy(probs, labels).loss;
  };

  for (auto li : m.parametric_layers()) {
    auto& layer = m.layer(li);
    auto ps = layer.params();
    auto gs = layer.grads();
    std::vector<std::pair<std::size_t, std::size_t>> slots;  // (block, index)
    for (std::size_t b = 0; b < ps.size(); ++b) {
      for (std::size_t i = 0; i < ps[b]->size(); ++i) slots.emplace_back(b, i);
    }
    if (opts.samples_per_layer > 0 && slots.size() > opts.samples_per_layer) {
      for (std::size_t i = 0; i < opts.samples_per_layer; ++i) {
        std::swap(slots[i], slots[i + uniform_index(rng, slots.size() - i)]);
      }
      slots.resize(opts.samples_per_layer);
    }

    std::uint64_t base = 0;
    loss_from(li, base);
    LayerGradError e;
    e.layer_index = li;
    e.kind = layer.spec().kind;
    for (auto [b, i] : slots) {
      double& w = (*ps[b])[i];
      const double analytic = (*gs[b])[i];
      const double orig = w;
      std::uint64_t sp = 0, sm = 0;
      double eps = opts.epsilon, numeric = 0.0;
      for (std::size_t attempt = 0;; ++attempt) {
        w = orig + eps;
        const double lp = loss_from(li, sp);
        w = orig - eps;
        const double lm = loss_from(li, sm);
        w = orig;
        numeric = (lp - lm) / (2.0 * eps);
        if (sp == base && sm == base) break;
        if (attempt == opts.max_shrinks) {
          ++e.unresolved;
          break;
        }
        if (attempt == 0) ++e.shrunk;
        eps /= 10.0;
      }
      e.max_rel_error = std::max(e.max_rel_error, relative_error(analytic, numeric));
      e.max_abs_error = std::max(e.max_abs_error, std::abs(analytic - numeric));
      ++e.checked;
    }
    report.push_back(e);
  }
  m.set_mode(prev);
  return report;
}

}  // namespace eegalc::cnn
