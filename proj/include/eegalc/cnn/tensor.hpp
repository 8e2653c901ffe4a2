#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "eegalc/error.hpp"

namespace eegalc::cnn {

/// (channels, height, width) of one sample.
struct Shape3 {
  std::size_t c = 0, h = 0, w = 0;
  std::size_t size() const { return c * h * w; }
  bool operator==(const Shape3&) const = default;
  std::string str() const {
    return "(" + std::to_string(c) + "," + std::to_string(h) + "," + std::to_string(w) + ")";
  }
};

/// Batch tensor in NCHW order.
struct Tensor {
  std::size_t n = 0;
  Shape3 shape;
  std::vector<double> data;

  Tensor() = default;
  Tensor(std::size_t batch, Shape3 s, double fill = 0.0)
      : n(batch), shape(s), data(batch * s.size(), fill) {}

  std::size_t sample_size() const { return shape.size(); }
  double* sample(std::size_t i) { return data.data() + i * shape.size(); }
  const double* sample(std::size_t i) const { return data.data() + i * shape.size(); }

  double& at(std::size_t i, std::size_t c, std::size_t y, std::size_t x) {
    return data[((i * shape.c + c) * shape.h + y) * shape.w + x];
  }
  double at(std::size_t i, std::size_t c, std::size_t y, std::size_t x) const {
    return data[((i * shape.c + c) * shape.h + y) * shape.w + x];
  }
};

}  // namespace eegalc::cnn
