#pragma once

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace dppa {

struct PlotSeries {
  std::string label;
  std::vector<std::pair<double, double>> points;  // (x, y); non-finite y skipped
};

namespace detail {

inline std::string xml_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
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

inline std::string fmt(double v, const char* spec = "%.2f") {
  char buf[48];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

// Tick spacing of the form {1,2,5}*10^k giving five to ten ticks.
inline double nice_step(double range) {
  if (!(range > 0.0)) return 1.0;
  const double rough = range / 6.0;
  const double mag = std::pow(10.0, std::floor(std::log10(rough)));
  for (double mult : {1.0, 2.0, 5.0, 10.0})
    if (rough <= mult * mag) return mult * mag;
  return 10.0 * mag;
}

}  // namespace detail

// Renders a deterministic standalone SVG line chart (fixed 960x540
// viewBox, no external resources). Throws when no series has a finite
// point.
inline std::string render_line_chart(const std::vector<PlotSeries>& series,
                                     const std::string& x_label,
                                     const std::string& y_label) {
  constexpr double kWidth = 960, kHeight = 540;
  constexpr double kLeft = 72, kRight = 936, kTop = 24, kBottom = 486;
  static const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                   "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

  double xmin = 0, xmax = 0, ymin = 0, ymax = 0;
  bool any = false;
  for (const auto& s : series)
    for (const auto& [x, y] : s.points) {
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      if (!any) {
        xmin = xmax = x;
        ymin = ymax = y;
        any = true;
      } else {
        xmin = std::min(xmin, x);
        xmax = std::max(xmax, x);
        ymin = std::min(ymin, y);
        ymax = std::max(ymax, y);
      }
    }
  if (!any) throw std::invalid_argument("render_line_chart: no finite data");
  if (xmax == xmin) {
    xmin -= 1;
    xmax += 1;
  }
  if (ymax == ymin) {
    ymin -= 1;
    ymax += 1;
  }

  const auto px = [&](double x) {
    return kLeft + (x - xmin) / (xmax - xmin) * (kRight - kLeft);
  };
  const auto py = [&](double y) {
    return kBottom - (y - ymin) / (ymax - ymin) * (kBottom - kTop);
  };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 960 540\" "
         "font-family=\"monospace\" font-size=\"12\">\n";
  out << "<rect x=\"0\" y=\"0\" width=\"960\" height=\"540\" fill=\"white\"/>\n";

  const double xstep = detail::nice_step(xmax - xmin);
  const double ystep = detail::nice_step(ymax - ymin);
  for (double x = std::ceil(xmin / xstep) * xstep; x <= xmax + 1e-9 * xstep; x += xstep) {
    const double p = px(x);
    out << "<line x1=\"" << detail::fmt(p) << "\" y1=\"" << detail::fmt(kTop)
        << "\" x2=\"" << detail::fmt(p) << "\" y2=\"" << detail::fmt(kBottom)
        << "\" stroke=\"#dddddd\"/>\n";
    out << "<text x=\"" << detail::fmt(p) << "\" y=\"" << detail::fmt(kBottom + 18)
        << "\" text-anchor=\"middle\">" << detail::fmt(x, "%g") << "</text>\n";
  }
  for (double y = std::ceil(ymin / ystep) * ystep; y <= ymax + 1e-9 * ystep; y += ystep) {
    const double p = py(y);
    out << "<line x1=\"" << detail::fmt(kLeft) << "\" y1=\"" << detail::fmt(p)
        << "\" x2=\"" << detail::fmt(kRight) << "\" y2=\"" << detail::fmt(p)
        << "\" stroke=\"#dddddd\"/>\n";
    out << "<text x=\"" << detail::fmt(kLeft - 6) << "\" y=\"" << detail::fmt(p + 4)
        << "\" text-anchor=\"end\">" << detail::fmt(y, "%g") << "</text>\n";
  }

  out << "<rect x=\"" << detail::fmt(kLeft) << "\" y=\"" << detail::fmt(kTop)
      << "\" width=\"" << detail::fmt(kRight - kLeft) << "\" height=\""
      << detail::fmt(kBottom - kTop) << "\" fill=\"none\" stroke=\"black\"/>\n";
  out << "<text x=\"" << detail::fmt((kLeft + kRight) / 2) << "\" y=\"530\" "
         "text-anchor=\"middle\">"
      << detail::xml_escape(x_label) << "</text>\n";
  out << "<text x=\"16\" y=\"" << detail::fmt((kTop + kBottom) / 2)
      << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << detail::fmt((kTop + kBottom) / 2) << ")\">" << detail::xml_escape(y_label)
      << "</text>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kPalette[s % (sizeof kPalette / sizeof kPalette[0])];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    bool first = true;
    for (const auto& [x, y] : series[s].points) {
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      if (!first) out << ' ';
      out << detail::fmt(px(x)) << ',' << detail::fmt(py(y));
      first = false;
    }
    out << "\"/>\n";
  }

  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kPalette[s % (sizeof kPalette / sizeof kPalette[0])];
    const double ly = kTop + 10 + 18 * static_cast<double>(s);
    out << "<line x1=\"" << detail::fmt(kRight - 150) << "\" y1=\"" << detail::fmt(ly)
        << "\" x2=\"" << detail::fmt(kRight - 120) << "\" y2=\"" << detail::fmt(ly)
        << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << detail::fmt(kRight - 114) << "\" y=\"" << detail::fmt(ly + 4)
        << "\">" << detail::xml_escape(series[s].label) << "</text>\n";
  }

  out << "</svg>\n";
  return out.str();
}

}  // namespace dppa
