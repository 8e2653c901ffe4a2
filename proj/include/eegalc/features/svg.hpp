#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "eegalc/checksum.hpp"
#include "eegalc/features/tensor.hpp"
#include "eegalc/ingest/electrode_map.hpp"

namespace eegalc {

struct Rgb {
  int r, g, b;
  bool operator==(const Rgb&) const = default;
};

/// Blue-white-red diverging map over t in [0,1].
inline Rgb diverging_color(double t) {
  constexpr Rgb lo{59, 76, 192}, mid{247, 247, 247}, hi{180, 4, 38};
  t = std::clamp(t, 0.0, 1.0);
  const auto lerp = [](int a, int b, double u) {
    return static_cast<int>(std::lround(a + (b - a) * u));
  };
  if (t < 0.5) {
    const double u = t / 0.5;
    return {lerp(lo.r, mid.r, u), lerp(lo.g, mid.g, u), lerp(lo.b, mid.b, u)};
  }
  const double u = (t - 0.5) / 0.5;
  return {lerp(mid.r, hi.r, u), lerp(mid.g, hi.g, u), lerp(mid.b, hi.b, u)};
}

inline std::string hex_color(Rgb c) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", c.r, c.g, c.b);
  return buf;
}

namespace detail {

inline std::string fmt_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace detail

/// Heatmap of channel 0 of the tensor. Correlation tensors use a fixed
/// [-1, 1] scale; other kinds are min-max scaled, and a constant slice maps to
/// the mid colour.
inline std::string heatmap_svg(const FeatureTensor& ft, const std::string& title = "",
                               bool fixed_unit_scale = false) {
  const std::size_t rows = ft.shape[1];
  const std::size_t cols = ft.shape[2];
  const double cell = cols > 128 ? 3.0 : 8.0;
  const double left = 48.0, top = 28.0;
  const double width = left + cell * static_cast<double>(cols) + 10.0;
  const double height = top + cell * static_cast<double>(rows) + 40.0;

  double lo = -1.0, hi = 1.0;
  const bool unit = fixed_unit_scale || ft.kind == FeatureKind::correlation;
  if (!unit) {
    lo = hi = ft.data.empty() ? 0.0 : ft.data.front();
    for (std::size_t i = 0; i < rows * cols; ++i) {
      lo = std::min(lo, ft.data[i]);
      hi = std::max(hi, ft.data[i]);
    }
  }
  const auto scale = [&](double v) {
    if (!std::isfinite(v)) return 0.5;
    if (hi == lo) return 0.5;
    return (v - lo) / (hi - lo);
  };

  const auto& map = ElectrodeMap::standard();
  std::string s;
  s.reserve(rows * cols * 90);
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + detail::fmt_num(width) +
       "\" height=\"" + detail::fmt_num(height) + "\" font-family=\"sans-serif\" font-size=\"6\">\n";
  s += "<text x=\"" + detail::fmt_num(left) + "\" y=\"14\" font-size=\"11\">" +
       detail::xml_escape(title.empty() ? std::string(to_string(ft.kind)) : title) + "</text>\n";
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const double v = ft.at(0, r, c);
      s += "<rect class=\"cell\" x=\"" + detail::fmt_num(left + cell * c) + "\" y=\"" +
           detail::fmt_num(top + cell * r) + "\" width=\"" + detail::fmt_num(cell) +
           "\" height=\"" + detail::fmt_num(cell) + "\" fill=\"" +
           hex_color(diverging_color(scale(v))) + "\"/>\n";
    }
  }
  const bool electrode_rows = rows == kChannels;
  for (std::size_t r = 0; r < rows; ++r) {
    if (!electrode_rows && r % 8 != 0) continue;
    const std::string label = electrode_rows ? std::string(map.name(r + 1)) : std::to_string(r);
    s += "<text class=\"row-label\" x=\"" + detail::fmt_num(left - 2) + "\" y=\"" +
         detail::fmt_num(top + cell * r + cell * 0.8) + "\" text-anchor=\"end\">" +
         detail::xml_escape(label) + "</text>\n";
  }
  const bool electrode_cols = ft.kind == FeatureKind::correlation && cols == kChannels;
  const std::size_t every = electrode_cols ? 1 : 32;
  for (std::size_t c = 0; c < cols; c += every) {
    const std::string label = electrode_cols ? std::string(map.name(c + 1)) : std::to_string(c);
    const double x = left + cell * c + cell * 0.5;
    const double y = top + cell * rows + 4;
    s += "<text class=\"col-label\" transform=\"translate(" + detail::fmt_num(x) + "," +
         detail::fmt_num(y) + ") rotate(90)\">" + detail::xml_escape(label) + "</text>\n";
  }
  s += "</svg>\n";
  return s;
}

inline void render_heatmap(const FeatureTensor& ft, const std::filesystem::path& path,
                           const std::string& title = "") {
  write_file_bytes(path, heatmap_svg(ft, title));
}

struct Bar {
  std::string label;
  double value;  // 0..100
};

/// Vertical bar chart with a 0..100 axis.
inline std::string bar_chart_svg(const std::vector<Bar>& bars, const std::string& title) {
  const double bw = 46.0, gap = 14.0, left = 40.0, top = 30.0, plot_h = 200.0;
  const double width = left + (bw + gap) * static_cast<double>(bars.size()) + 20.0;
  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + detail::fmt_num(width) +
                  "\" height=\"" + detail::fmt_num(top + plot_h + 50) +
                  "\" font-family=\"sans-serif\" font-size=\"10\">\n";
  s += "<text x=\"" + detail::fmt_num(left) + "\" y=\"16\" font-size=\"12\">" +
       detail::xml_escape(title) + "</text>\n";
  s += "<line x1=\"" + detail::fmt_num(left) + "\" y1=\"" + detail::fmt_num(top + plot_h) +
       "\" x2=\"" + detail::fmt_num(width - 10) + "\" y2=\"" + detail::fmt_num(top + plot_h) +
       "\" stroke=\"black\"/>\n";
  for (int tick = 0; tick <= 100; tick += 25) {
    const double y = top + plot_h * (1.0 - tick / 100.0);
    s += "<text x=\"" + detail::fmt_num(left - 4) + "\" y=\"" + detail::fmt_num(y + 3) +
         "\" text-anchor=\"end\">" + std::to_string(tick) + "</text>\n";
  }
  for (std::size_t i = 0; i < bars.size(); ++i) {
    const double v = std::clamp(bars[i].value, 0.0, 100.0);
    const double h = plot_h * v / 100.0;
    const double x = left + gap / 2 + (bw + gap) * static_cast<double>(i);
    s += "<rect class=\"bar\" x=\"" + detail::fmt_num(x) + "\" y=\"" +
         detail::fmt_num(top + plot_h - h) + "\" width=\"" + detail::fmt_num(bw) + "\" height=\"" +
         detail::fmt_num(h) + "\" fill=\"#4c72b0\"/>\n";
    s += "<text x=\"" + detail::fmt_num(x + bw / 2) + "\" y=\"" +
         detail::fmt_num(top + plot_h - h - 3) + "\" text-anchor=\"middle\">" +
         detail::fmt_num(v) + "</text>\n";
    s += "<text x=\"" + detail::fmt_num(x + bw / 2) + "\" y=\"" +
         detail::fmt_num(top + plot_h + 14) + "\" text-anchor=\"middle\">" +
         detail::xml_escape(bars[i].label) + "</text>\n";
  }
  s += "</svg>\n";
  return s;
}

struct Series {
  std::string label;
  std::vector<double> y;
};

/// Stacked line plots sharing an x axis (one panel per series).
inline std::string line_plot_svg(const std::vector<Series>& series, double x_step,
                                 const std::string& x_label, const std::string& title) {
  const double panel_h = 70.0, left = 70.0, top = 26.0, plot_w = 600.0;
  const double height = top + panel_h * static_cast<double>(series.size()) + 30.0;
  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
                  detail::fmt_num(left + plot_w + 20) + "\" height=\"" + detail::fmt_num(height) +
                  "\" font-family=\"sans-serif\" font-size=\"10\">\n";
  s += "<text x=\"" + detail::fmt_num(left) + "\" y=\"16\" font-size=\"12\">" +
       detail::xml_escape(title) + "</text>\n";
  for (std::size_t p = 0; p < series.size(); ++p) {
    const auto& y = series[p].y;
    const double y0 = top + panel_h * static_cast<double>(p);
    double lo = 0.0, hi = 0.0;
    if (!y.empty()) {
      lo = *std::min_element(y.begin(), y.end());
      hi = *std::max_element(y.begin(), y.end());
    }
    const double span = hi > lo ? hi - lo : 1.0;
    s += "<text x=\"" + detail::fmt_num(left - 6) + "\" y=\"" + detail::fmt_num(y0 + panel_h / 2) +
         "\" text-anchor=\"end\">" + detail::xml_escape(series[p].label) + "</text>\n";
    s += "<polyline fill=\"none\" stroke=\"#333\" stroke-width=\"0.8\" points=\"";
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double x = left + plot_w * (y.size() > 1 ? static_cast<double>(i) / (y.size() - 1) : 0.0);
      const double yy = y0 + panel_h - 6 - (panel_h - 12) * (y[i] - lo) / span;
      s += detail::fmt_num(x) + "," + detail::fmt_num(yy) + " ";
    }
    s += "\"/>\n";
  }
  const double total = x_step * static_cast<double>(series.empty() ? 0 : series[0].y.size());
  s += "<text x=\"" + detail::fmt_num(left + plot_w / 2) + "\" y=\"" + detail::fmt_num(height - 8) +
       "\" text-anchor=\"middle\">" + detail::xml_escape(x_label) + " (0 .. " +
       detail::fmt_num(total) + ")</text>\n";
  s += "</svg>\n";
  return s;
}

}  // namespace eegalc
