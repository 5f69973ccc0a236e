#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "ucl/csv.hpp"

namespace ucl {

struct PlotSeries {
  std::string label;
  std::string color;
  std::vector<double> values; // y at x = 1, 2, ...
};

namespace detail {

inline std::string svg_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

/// Round tick step: 1, 2 or 5 times a power of ten covering span/4.
inline double tick_step(double span) {
  if (!(span > 0.0)) return 1.0;
  const double raw = span / 4.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double r = raw / mag;
  if (r <= 1.0) return mag;
  if (r <= 2.0) return 2.0 * mag;
  if (r <= 5.0) return 5.0 * mag;
  return 10.0 * mag;
}

} // namespace detail

/// Minimal standalone line chart: axes with ticks, one polyline per series
/// and a legend.  Intended for quick inspection of regret curves; the CSV
/// output is the canonical record.
inline std::string render_line_chart(const std::vector<PlotSeries>& series,
                                     const std::string& title,
                                     const std::string& x_label,
                                     const std::string& y_label) {
  const int width = 860, height = 520;
  const int left = 80, right = 30, top = 50, bottom = 60;
  const double plot_w = width - left - right;
  const double plot_h = height - top - bottom;

  long max_x = 1;
  double min_y = 0.0, max_y = 1.0;
  bool any = false;
  for (const auto& s : series) {
    if (s.values.empty()) continue;
    max_x = std::max<long>(max_x, static_cast<long>(s.values.size()));
    for (double v : s.values) {
      if (!any) {
        min_y = max_y = v;
        any = true;
      } else {
        min_y = std::min(min_y, v);
        max_y = std::max(max_y, v);
      }
    }
  }
  if (!any) {
    min_y = 0.0;
    max_y = 1.0;
  }
  min_y = std::min(min_y, 0.0);
  if (max_y <= min_y) max_y = min_y + 1.0;

  const auto sx = [&](double x) {
    return left + plot_w * (x - 1.0) / std::max(1.0, static_cast<double>(max_x - 1));
  };
  const auto sy = [&](double y) {
    return top + plot_h * (1.0 - (y - min_y) / (max_y - min_y));
  };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         std::to_string(width) + "\" height=\"" + std::to_string(height) +
         "\" viewBox=\"0 0 " + std::to_string(width) + " " +
         std::to_string(height) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + std::to_string(width / 2) +
         "\" y=\"28\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"18\">" +
         detail::svg_escape(title) + "</text>\n";

  // axes
  svg += "<line x1=\"" + std::to_string(left) + "\" y1=\"" +
         std::to_string(top) + "\" x2=\"" + std::to_string(left) + "\" y2=\"" +
         std::to_string(height - bottom) + "\" stroke=\"black\"/>\n";
  svg += "<line x1=\"" + std::to_string(left) + "\" y1=\"" +
         std::to_string(height - bottom) + "\" x2=\"" +
         std::to_string(width - right) + "\" y2=\"" +
         std::to_string(height - bottom) + "\" stroke=\"black\"/>\n";

  const double ystep = detail::tick_step(max_y - min_y);
  for (double y = std::ceil(min_y / ystep) * ystep; y <= max_y + 1e-9 * ystep;
       y += ystep) {
    const double py = sy(y);
    svg += "<line x1=\"" + std::to_string(left - 5) + "\" y1=\"" +
           detail::format_number(py) + "\" x2=\"" + std::to_string(left) +
           "\" y2=\"" + detail::format_number(py) + "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + std::to_string(left - 9) + "\" y=\"" +
           detail::format_number(py + 4) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" "
           "font-size=\"12\">" +
           detail::format_number(y) + "</text>\n";
  }
  const double xstep = detail::tick_step(static_cast<double>(max_x - 1));
  for (double x = 1.0; x <= static_cast<double>(max_x) + 1e-9; x += xstep) {
    const double px = sx(x);
    svg += "<line x1=\"" + detail::format_number(px) + "\" y1=\"" +
           std::to_string(height - bottom) + "\" x2=\"" +
           detail::format_number(px) + "\" y2=\"" +
           std::to_string(height - bottom + 5) + "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + detail::format_number(px) + "\" y=\"" +
           std::to_string(height - bottom + 20) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"12\">" +
           detail::format_number(x) + "</text>\n";
  }
  svg += "<text x=\"" + std::to_string(left + static_cast<int>(plot_w) / 2) +
         "\" y=\"" + std::to_string(height - 15) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"14\">" +
         detail::svg_escape(x_label) + "</text>\n";
  svg += "<text x=\"20\" y=\"" + std::to_string(top + static_cast<int>(plot_h) / 2) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\" "
         "transform=\"rotate(-90 20 " +
         std::to_string(top + static_cast<int>(plot_h) / 2) + ")\">" +
         detail::svg_escape(y_label) + "</text>\n";

  // series
  for (const auto& s : series) {
    if (s.values.empty()) continue;
    // thin long series so the file stays small
    const std::size_t stride =
        std::max<std::size_t>(1, s.values.size() / 2000);
    std::string points;
    for (std::size_t k = 0; k < s.values.size(); k += stride) {
      points += detail::format_number(sx(static_cast<double>(k + 1)));
      points += ',';
      points += detail::format_number(sy(s.values[k]));
      points += ' ';
    }
    if ((s.values.size() - 1) % stride != 0) {
      points += detail::format_number(sx(static_cast<double>(s.values.size())));
      points += ',';
      points += detail::format_number(sy(s.values.back()));
    }
    svg += "<polyline fill=\"none\" stroke=\"" + s.color +
           "\" stroke-width=\"1.5\" points=\"" + points + "\"/>\n";
  }

  // legend
  int ly = top + 10;
  for (const auto& s : series) {
    svg += "<line x1=\"" + std::to_string(left + 15) + "\" y1=\"" +
           std::to_string(ly) + "\" x2=\"" + std::to_string(left + 45) +
           "\" y2=\"" + std::to_string(ly) + "\" stroke=\"" + s.color +
           "\" stroke-width=\"2\"/>\n";
    svg += "<text x=\"" + std::to_string(left + 52) + "\" y=\"" +
           std::to_string(ly + 4) +
           "\" font-family=\"sans-serif\" font-size=\"13\">" +
           detail::svg_escape(s.label) + "</text>\n";
    ly += 20;
  }

  svg += "</svg>\n";
  return svg;
}

} // namespace ucl
