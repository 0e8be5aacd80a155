#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "drbandit/io.hpp"

namespace drbandit {

/// One curve: y over x, with an optional +/- sd band.
struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> sd;  // empty: no band
  std::string color;       // empty: assigned from the default palette
};

namespace detail {

inline double nice_step(double span, int target_ticks) {
  if (span <= 0.0) return 1.0;
  const double raw = span / std::max(1, target_ticks);
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (raw <= m * mag) return m * mag;
  }
  return 10.0 * mag;
}

inline std::string tick_label(double value) {
  if (value == 0.0) return "0";
  const double a = std::fabs(value);
  if (a >= 0.01 && a < 100000.0) {
    std::string s = format_double(value);
    if (s.size() > 7) s = s.substr(0, 7);
    return s;
  }
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.1e", value);
  return buffer;
}

}  // namespace detail

/// Renders a static SVG line chart. CSV stays the canonical output; this is
/// the convenience view of the same series.
inline std::string render_line_plot(const std::string& title, const std::string& x_label,
                                    const std::string& y_label,
                                    std::vector<PlotSeries> series, int width = 720,
                                    int height = 440) {
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                  "#ff7f0e", "#8c564b"};
  const double left = 72, right = 24, top = 40, bottom = 52;
  const double plot_w = width - left - right;
  const double plot_h = height - top - bottom;

  double x_min = 0.0, x_max = 1.0, y_min = 0.0, y_max = 1.0;
  bool first = true;
  for (const auto& s : series) {
    for (std::size_t k = 0; k < s.x.size(); ++k) {
      const double lo = s.sd.empty() ? s.y[k] : s.y[k] - s.sd[k];
      const double hi = s.sd.empty() ? s.y[k] : s.y[k] + s.sd[k];
      if (first) {
        x_min = x_max = s.x[k];
        y_min = lo;
        y_max = hi;
        first = false;
      } else {
        x_min = std::min(x_min, s.x[k]);
        x_max = std::max(x_max, s.x[k]);
        y_min = std::min(y_min, lo);
        y_max = std::max(y_max, hi);
      }
    }
  }
  if (x_max == x_min) x_max = x_min + 1.0;
  if (y_max == y_min) y_max = y_min + 1.0;
  y_min = std::min(y_min, 0.0);
  const double y_pad = 0.04 * (y_max - y_min);
  y_max += y_pad;

  auto sx = [&](double x) { return left + (x - x_min) / (x_max - x_min) * plot_w; };
  auto sy = [&](double y) { return top + plot_h - (y - y_min) / (y_max - y_min) * plot_h; };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) +
         "\" height=\"" + std::to_string(height) + "\" viewBox=\"0 0 " +
         std::to_string(width) + " " + std::to_string(height) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + format_double(left + plot_w / 2) +
         "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">" +
         title + "</text>\n";

  const double x_step = detail::nice_step(x_max - x_min, 5);
  const double y_step = detail::nice_step(y_max - y_min, 5);
  svg += "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#444\">\n";
  for (double tick = std::ceil(x_min / x_step) * x_step; tick <= x_max + 1e-9;
       tick += x_step) {
    const double px = sx(tick);
    svg += "<line x1=\"" + format_double(px) + "\" y1=\"" + format_double(top) +
           "\" x2=\"" + format_double(px) + "\" y2=\"" + format_double(top + plot_h) +
           "\" stroke=\"#e0e0e0\"/>\n";
    svg += "<text x=\"" + format_double(px) + "\" y=\"" +
           format_double(top + plot_h + 16) + "\" text-anchor=\"middle\">" +
           detail::tick_label(tick) + "</text>\n";
  }
  for (double tick = std::ceil(y_min / y_step) * y_step; tick <= y_max + 1e-9;
       tick += y_step) {
    const double py = sy(tick);
    svg += "<line x1=\"" + format_double(left) + "\" y1=\"" + format_double(py) +
           "\" x2=\"" + format_double(left + plot_w) + "\" y2=\"" + format_double(py) +
           "\" stroke=\"#e0e0e0\"/>\n";
    svg += "<text x=\"" + format_double(left - 6) + "\" y=\"" + format_double(py + 4) +
           "\" text-anchor=\"end\">" + detail::tick_label(tick) + "</text>\n";
  }
  svg += "</g>\n";

  // axes + labels
  svg += "<rect x=\"" + format_double(left) + "\" y=\"" + format_double(top) +
         "\" width=\"" + format_double(plot_w) + "\" height=\"" + format_double(plot_h) +
         "\" fill=\"none\" stroke=\"#333\"/>\n";
  svg += "<text x=\"" + format_double(left + plot_w / 2) + "\" y=\"" +
         format_double(height - 12.0) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" +
         x_label + "</text>\n";
  svg += "<text x=\"16\" y=\"" + format_double(top + plot_h / 2) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
         "transform=\"rotate(-90 16 " +
         format_double(top + plot_h / 2) + ")\">" + y_label + "</text>\n";

  // series: downsample long traces to keep files small
  int color_index = 0;
  for (auto& s : series) {
    if (s.color.empty()) s.color = palette[color_index++ % 6];
    const std::size_t n = s.x.size();
    if (n == 0) continue;
    const std::size_t stride = std::max<std::size_t>(1, n / 800);

    if (!s.sd.empty()) {
      std::string band = "<polygon fill=\"" + s.color + "\" opacity=\"0.15\" points=\"";
      for (std::size_t k = 0; k < n; k += stride) {
        band += format_double(sx(s.x[k])) + "," + format_double(sy(s.y[k] + s.sd[k])) + " ";
      }
      for (std::size_t k = n; k > 0;) {
        k = k > stride ? k - stride : 0;
        band += format_double(sx(s.x[k])) + "," + format_double(sy(s.y[k] - s.sd[k])) + " ";
        if (k == 0) break;
      }
      band += "\"/>\n";
      svg += band;
    }

    std::string line = "<polyline fill=\"none\" stroke=\"" + s.color +
                       "\" stroke-width=\"1.6\" points=\"";
    for (std::size_t k = 0; k < n; k += stride) {
      line += format_double(sx(s.x[k])) + "," + format_double(sy(s.y[k])) + " ";
    }
    if ((n - 1) % stride != 0) {
      line += format_double(sx(s.x[n - 1])) + "," + format_double(sy(s.y[n - 1]));
    }
    line += "\"/>\n";
    svg += line;
  }

  // legend
  double ly = top + 10;
  for (const auto& s : series) {
    svg += "<line x1=\"" + format_double(left + 12) + "\" y1=\"" + format_double(ly) +
           "\" x2=\"" + format_double(left + 36) + "\" y2=\"" + format_double(ly) +
           "\" stroke=\"" + s.color + "\" stroke-width=\"2\"/>\n";
    svg += "<text x=\"" + format_double(left + 42) + "\" y=\"" + format_double(ly + 4) +
           "\" font-family=\"sans-serif\" font-size=\"12\">" + s.label + "</text>\n";
    ly += 18;
  }

  svg += "</svg>\n";
  return svg;
}

}  // namespace drbandit
