#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include <cnode/errors.hpp>
#include <cnode/numerics/csv.hpp>

namespace cnode::analysis {

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotOptions {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_y = false;
  int width = 800;
  int height = 400;
};

namespace detail {

inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

inline std::string fixed(double v, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

inline std::string tick(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

}  // namespace detail

/**
 * Self-contained SVG line chart, one polyline per series. Points that are
 * non-finite (or non-positive on a log axis) break the line.
 */
inline void write_line_plot(std::ostream& out, const std::vector<Series>& series, const PlotOptions& opt) {
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"};
  auto ty = [&](double y) { return opt.log_y ? (y > 0.0 ? std::log10(y) : std::numeric_limits<double>::quiet_NaN()) : y; };

  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series) {
    if (s.x.size() != s.y.size()) throw DimensionError("plot series '" + s.name + "' has mismatched x/y lengths");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      const double y = ty(s.y[i]);
      if (!std::isfinite(s.x[i]) || !std::isfinite(y)) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
  }
  if (!(x0 <= x1)) x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
  if (x1 == x0) x0 -= 0.5, x1 += 0.5;
  if (y1 == y0) y0 -= 0.5, y1 += 0.5;

  const double left = 70, right = 160, top = 40, bottom = 50;
  const double pw = opt.width - left - right, ph = opt.height - top - bottom;
  auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) { return top + (1.0 - (y - y0) / (y1 - y0)) * ph; };
  auto label_y = [&](double y) { return detail::tick(opt.log_y ? std::pow(10.0, y) : y); };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opt.width << "\" height=\"" << opt.height
      << "\" viewBox=\"0 0 " << opt.width << ' ' << opt.height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << opt.width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">"
      << detail::xml_escape(opt.title) << "</text>\n";
  out << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"#444\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double fx = x0 + (x1 - x0) * i / 4.0, fy = y0 + (y1 - y0) * i / 4.0;
    out << "<text x=\"" << detail::fixed(px(fx)) << "\" y=\"" << detail::fixed(top + ph + 18)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << detail::tick(fx) << "</text>\n";
    out << "<text x=\"" << detail::fixed(left - 6) << "\" y=\"" << detail::fixed(py(fy) + 4)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << label_y(fy) << "</text>\n";
  }
  out << "<text x=\"" << detail::fixed(left + pw / 2) << "\" y=\"" << opt.height - 10
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << detail::xml_escape(opt.x_label)
      << "</text>\n";
  out << "<text x=\"16\" y=\"" << detail::fixed(top + ph / 2) << "\" transform=\"rotate(-90 16 " << detail::fixed(top + ph / 2)
      << ")\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
      << detail::xml_escape(opt.y_label + (opt.log_y ? " (log scale)" : "")) << "</text>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = palette[s % std::size(palette)];
    std::string points;
    auto flush = [&] {
      if (!points.empty()) {
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"" << points << "\"/>\n";
        points.clear();
      }
    };
    for (std::size_t i = 0; i < series[s].x.size(); ++i) {
      const double y = ty(series[s].y[i]);
      if (!std::isfinite(series[s].x[i]) || !std::isfinite(y)) {
        flush();
        continue;
      }
      if (!points.empty()) points += ' ';
      points += detail::fixed(px(series[s].x[i])) + ',' + detail::fixed(py(y));
    }
    flush();
    const double ly = top + 14 + 18.0 * static_cast<double>(s);
    out << "<line x1=\"" << detail::fixed(left + pw + 12) << "\" y1=\"" << detail::fixed(ly - 4) << "\" x2=\""
        << detail::fixed(left + pw + 32) << "\" y2=\"" << detail::fixed(ly - 4) << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << detail::fixed(left + pw + 38) << "\" y=\"" << detail::fixed(ly)
        << "\" font-family=\"sans-serif\" font-size=\"12\">" << detail::xml_escape(series[s].name) << "</text>\n";
  }
  out << "</svg>\n";
}

inline void write_line_plot(const std::filesystem::path& path, const std::vector<Series>& series, const PlotOptions& opt) {
  auto out = open_for_write(path);
  write_line_plot(out, series, opt);
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace cnode::analysis
