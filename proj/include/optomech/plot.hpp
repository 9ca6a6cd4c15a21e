#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "optomech/param_fields.hpp"
#include "optomech/sweep.hpp"

// Minimal SVG output for sweep results: a line chart for one-axis sweeps
// (one curve per family value) and a heat map for two-axis sweeps. Points
// without a steady state are left out of curves and drawn grey in maps.
namespace optomech::plot {

namespace detail {

inline constexpr double kWidth = 640.0;
inline constexpr double kHeight = 480.0;
inline constexpr double kLeft = 70.0;
inline constexpr double kRight = 20.0;
inline constexpr double kTop = 30.0;
inline constexpr double kBottom = 50.0;
inline constexpr std::array<const char*, 6> kPalette{"#1f77b4", "#d62728", "#2ca02c",
                                                     "#9467bd", "#ff7f0e", "#17becf"};

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::string label(const std::string& name) {
  const ParamField& f = param_field(name);
  return f.canonical_unit.empty() ? name : name + " [" + std::string(f.canonical_unit) + "]";
}

inline void frame(std::ostream& os, const std::string& title, const std::string& xlabel,
                  const std::string& ylabel, double x0, double x1, double y0, double y1) {
  const double w = kWidth - kLeft - kRight;
  const double h = kHeight - kTop - kBottom;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
     << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
     << "<rect x=\"0\" y=\"0\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" fill=\"white\"/>\n"
     << "<text x=\"" << kWidth / 2 << "\" y=\"18\" text-anchor=\"middle\">" << title << "</text>\n"
     << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << w << "\" height=\"" << h
     << "\" fill=\"none\" stroke=\"black\"/>\n"
     << "<text x=\"" << kLeft + w / 2 << "\" y=\"" << kHeight - 12
     << "\" text-anchor=\"middle\">" << xlabel << "</text>\n"
     << "<text x=\"16\" y=\"" << kTop + h / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
     << kTop + h / 2 << ")\">" << ylabel << "</text>\n";
  auto tick = [&](double x, double y, const std::string& text, const char* anchor) {
    os << "<text x=\"" << num(x) << "\" y=\"" << num(y) << "\" text-anchor=\"" << anchor << "\">"
       << text << "</text>\n";
  };
  tick(kLeft, kTop + h + 16, format_double(x0), "start");
  tick(kLeft + w, kTop + h + 16, format_double(x1), "end");
  tick(kLeft - 6, kTop + h, format_double(y0), "end");
  tick(kLeft - 6, kTop + 10, format_double(y1), "end");
}

}  // namespace detail

inline void write_line_chart(std::ostream& os, const SweepResult& result) {
  using namespace detail;
  const Axis& axis = result.spec.axes.front();
  const std::size_t curves = result.spec.family ? result.spec.family->values.size() : 1;
  const std::size_t n = static_cast<std::size_t>(axis.points);
  double ymax = 0.0;
  for (const auto& rec : result.records) {
    if (rec.result.has_value()) ymax = std::max(ymax, rec.result.log_negativity());
  }
  if (ymax <= 0.0) ymax = 1.0;
  const double w = kWidth - kLeft - kRight;
  const double h = kHeight - kTop - kBottom;
  frame(os, result.spec.label.empty() ? "E_N" : result.spec.label, label(axis.name), "E_N",
        axis.min, axis.max, 0.0, ymax);
  for (std::size_t c = 0; c < curves; ++c) {
    const char* colour = kPalette[c % kPalette.size()];
    std::string path;
    bool pen_down = false;
    for (std::size_t i = 0; i < n; ++i) {
      const PointRecord& rec = result.records[c * n + i];
      if (!rec.result.has_value()) {
        pen_down = false;
        continue;
      }
      const double x = kLeft + w * (rec.coordinates.back() - axis.min) / (axis.max - axis.min);
      const double y = kTop + h * (1.0 - rec.result.log_negativity() / ymax);
      path += (pen_down ? " L" : " M") + num(x) + " " + num(y);
      pen_down = true;
    }
    os << "<path d=\"" << path << "\" fill=\"none\" stroke=\"" << colour
       << "\" stroke-width=\"1.5\"/>\n";
    if (result.spec.family) {
      os << "<text x=\"" << num(kWidth - kRight - 8) << "\" y=\"" << num(kTop + 16 + 14.0 * c)
         << "\" text-anchor=\"end\" fill=\"" << colour << "\">" << result.spec.family->name << " = "
         << format_double(result.spec.family->values[c]) << "</text>\n";
    }
  }
  os << "</svg>\n";
}

inline void write_heat_map(std::ostream& os, const SweepResult& result) {
  using namespace detail;
  const Axis& ax = result.spec.axes[0];
  const Axis& ay = result.spec.axes[1];
  double vmax = 0.0;
  for (const auto& rec : result.records) {
    if (rec.result.has_value()) vmax = std::max(vmax, rec.result.log_negativity());
  }
  if (vmax <= 0.0) vmax = 1.0;
  frame(os, (result.spec.label.empty() ? std::string("E_N") : result.spec.label) +
                " (max E_N = " + format_double(vmax) + ")",
        label(ax.name), label(ay.name), ax.min, ax.max, ay.min, ay.max);
  const double w = (kWidth - kLeft - kRight) / ax.points;
  const double h = (kHeight - kTop - kBottom) / ay.points;
  // Records are ordered with the second axis fastest.
  for (int i = 0; i < ax.points; ++i) {
    for (int j = 0; j < ay.points; ++j) {
      const PointRecord& rec = result.records[static_cast<std::size_t>(i * ay.points + j)];
      std::string fill = "#bbbbbb";
      if (rec.result.has_value()) {
        const double t = rec.result.log_negativity() / vmax;
        const int red = static_cast<int>(std::lround(255.0 * t));
        const int blue = 255 - red;
        char buf[16];
        std::snprintf(buf, sizeof buf, "#%02x%02x%02x", red, 64, blue);
        fill = buf;
      }
      os << "<rect x=\"" << num(kLeft + i * w) << "\" y=\""
         << num(kHeight - kBottom - (j + 1) * h) << "\" width=\"" << num(w + 0.5)
         << "\" height=\"" << num(h + 0.5) << "\" fill=\"" << fill << "\"/>\n";
    }
  }
  os << "</svg>\n";
}

inline void write_svg(std::ostream& os, const SweepResult& result) {
  if (result.spec.axes.size() == 2) {
    write_heat_map(os, result);
  } else {
    write_line_chart(os, result);
  }
}

}  // namespace optomech::plot
