#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "regiosim/csv.hpp"
#include "regiosim/errors.hpp"

namespace regiosim::svg {

struct Series {
  std::string label;
  std::string color = "#1f77b4";
  std::vector<double> x;
  std::vector<double> y;
};

/// Shaded vertical band between lo(x) and hi(x); used for mean +/- 1 SD.
struct Band {
  std::vector<double> x;
  std::vector<double> lo;
  std::vector<double> hi;
  std::string color = "#1f77b4";
};

struct Chart {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
  std::optional<Band> band;
  std::vector<std::pair<double, std::string>> h_lines;  // reference value, label
};

namespace detail_svg {

inline std::string num(double v) { return csv::format_double(v); }

struct Extent {
  double x_min = 0, x_max = 1, y_min = 0, y_max = 1;
};

inline Extent extent_of(const Chart& c) {
  Extent e;
  bool first = true;
  auto eat = [&](double x, double y) {
    if (!std::isfinite(x) || !std::isfinite(y)) return;
    if (first) {
      e.x_min = e.x_max = x;
      e.y_min = e.y_max = y;
      first = false;
      return;
    }
    e.x_min = std::min(e.x_min, x);
    e.x_max = std::max(e.x_max, x);
    e.y_min = std::min(e.y_min, y);
    e.y_max = std::max(e.y_max, y);
  };
  for (const auto& s : c.series)
    for (std::size_t i = 0; i < s.x.size(); ++i) eat(s.x[i], s.y[i]);
  if (c.band) {
    for (std::size_t i = 0; i < c.band->x.size(); ++i) {
      eat(c.band->x[i], c.band->lo[i]);
      eat(c.band->x[i], c.band->hi[i]);
    }
  }
  for (const auto& [v, label] : c.h_lines) eat(e.x_min, v);
  if (e.x_max == e.x_min) e.x_max = e.x_min + 1.0;
  if (e.y_max == e.y_min) e.y_max = e.y_min + 1.0;
  const double pad = 0.05 * (e.y_max - e.y_min);
  e.y_min -= pad;
  e.y_max += pad;
  return e;
}

}  // namespace detail_svg

/// Minimal deterministic line chart: axes, min/max tick labels, polylines,
/// optional shaded band and dashed horizontal reference lines. No timestamps
/// or randomness, so identical charts are byte-identical.
inline void write_chart(const std::string& path, const Chart& chart) {
  const int width = 720, height = 440;
  const int ml = 70, mr = 20, mt = 40, mb = 50;
  const detail_svg::Extent e = detail_svg::extent_of(chart);
  auto px = [&](double x) {
    return ml + (x - e.x_min) / (e.x_max - e.x_min) * (width - ml - mr);
  };
  auto py = [&](double y) {
    return height - mb - (y - e.y_min) / (e.y_max - e.y_min) * (height - mt - mb);
  };

  std::ofstream out(path);
  detail::require(out.good(), ErrorCode::IoError, "cannot write " + path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
      << chart.title << "</text>\n";

  if (chart.band) {
    out << "<polygon fill=\"" << chart.band->color << "\" fill-opacity=\"0.18\" stroke=\"none\" points=\"";
    for (std::size_t i = 0; i < chart.band->x.size(); ++i) {
      out << detail_svg::num(px(chart.band->x[i])) << ',' << detail_svg::num(py(chart.band->hi[i])) << ' ';
    }
    for (std::size_t i = chart.band->x.size(); i-- > 0;) {
      out << detail_svg::num(px(chart.band->x[i])) << ',' << detail_svg::num(py(chart.band->lo[i])) << ' ';
    }
    out << "\"/>\n";
  }

  // axes
  out << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << height - mb
      << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << ml << "\" y1=\"" << height - mb << "\" x2=\"" << width - mr << "\" y2=\""
      << height - mb << "\" stroke=\"black\"/>\n";
  out << "<text x=\"" << ml - 8 << "\" y=\"" << height - mb << "\" text-anchor=\"end\" font-size=\"11\">"
      << detail_svg::num(e.y_min) << "</text>\n";
  out << "<text x=\"" << ml - 8 << "\" y=\"" << mt + 4 << "\" text-anchor=\"end\" font-size=\"11\">"
      << detail_svg::num(e.y_max) << "</text>\n";
  out << "<text x=\"" << ml << "\" y=\"" << height - mb + 16 << "\" text-anchor=\"middle\" font-size=\"11\">"
      << detail_svg::num(e.x_min) << "</text>\n";
  out << "<text x=\"" << width - mr << "\" y=\"" << height - mb + 16
      << "\" text-anchor=\"end\" font-size=\"11\">" << detail_svg::num(e.x_max) << "</text>\n";
  out << "<text x=\"" << (ml + width - mr) / 2 << "\" y=\"" << height - 12
      << "\" text-anchor=\"middle\" font-size=\"12\">" << chart.x_label << "</text>\n";
  out << "<text x=\"16\" y=\"" << (mt + height - mb) / 2
      << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 16 "
      << (mt + height - mb) / 2 << ")\">" << chart.y_label << "</text>\n";

  for (const auto& [v, label] : chart.h_lines) {
    out << "<line x1=\"" << ml << "\" y1=\"" << detail_svg::num(py(v)) << "\" x2=\"" << width - mr
        << "\" y2=\"" << detail_svg::num(py(v))
        << "\" stroke=\"#555555\" stroke-dasharray=\"6 4\"/>\n";
    out << "<text x=\"" << width - mr - 4 << "\" y=\"" << detail_svg::num(py(v) - 5)
        << "\" text-anchor=\"end\" font-size=\"11\" fill=\"#555555\">" << label << "</text>\n";
  }

  int legend_y = mt + 6;
  for (const auto& s : chart.series) {
    out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.6\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      out << detail_svg::num(px(s.x[i])) << ',' << detail_svg::num(py(s.y[i])) << ' ';
    }
    out << "\"/>\n";
    out << "<line x1=\"" << width - mr - 120 << "\" y1=\"" << legend_y << "\" x2=\""
        << width - mr - 100 << "\" y2=\"" << legend_y << "\" stroke=\"" << s.color
        << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << width - mr - 94 << "\" y=\"" << legend_y + 4
        << "\" font-size=\"11\">" << s.label << "</text>\n";
    legend_y += 16;
  }
  out << "</svg>\n";
}

}  // namespace regiosim::svg
