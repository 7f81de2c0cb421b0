#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace kansa::app {

/// Shortest round-trip form, 17 significant digits.
inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  return out;
}

/// time_d followed by one column per node id (1-based).
inline void write_series_csv(std::ostream& out, const std::vector<double>& times,
                             const std::vector<Eigen::VectorXd>& values, bool clamp_nonnegative = false) {
  if (times.size() != values.size()) throw std::invalid_argument("write_series_csv: length mismatch");
  const Eigen::Index n = values.empty() ? 0 : values.front().size();
  out << "time_d";
  for (Eigen::Index j = 0; j < n; ++j) out << ',' << (j + 1);
  out << "\r\n";
  for (std::size_t k = 0; k < times.size(); ++k) {
    out << fmt17(times[k]);
    for (Eigen::Index j = 0; j < n; ++j) {
      const double v = values[k][j];
      out << ',' << fmt17(clamp_nonnegative ? std::max(v, 0.0) : v);
    }
    out << "\r\n";
  }
}

/**
 * Minimal self-contained SVG line/scatter charts.
 */
class SvgChart {
 public:
  struct Series {
    std::vector<double> x, y;
    std::string color;
    bool markers = false;
    double width = 1.0;
    double opacity = 1.0;
  };

  struct Panel {
    std::string title, xlabel, ylabel;
    std::vector<Series> series;
  };

  std::vector<Panel> panels;
  double panel_width = 480, panel_height = 360;

  std::string render() const {
    std::ostringstream s;
    const double W = panel_width * static_cast<double>(std::max<std::size_t>(panels.size(), 1));
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << panel_height
      << "\" viewBox=\"0 0 " << W << ' ' << panel_height << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (std::size_t p = 0; p < panels.size(); ++p) render_panel(s, panels[p], panel_width * static_cast<double>(p));
    s << "</svg>\n";
    return s.str();
  }

 private:
  static std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
  }

  void render_panel(std::ostringstream& s, const Panel& panel, double x0) const {
    const double left = x0 + 70, right = x0 + panel_width - 15, top = 30, bottom = panel_height - 45;
    double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
    for (const auto& se : panel.series)
      for (std::size_t i = 0; i < se.x.size(); ++i) {
        xmin = std::min(xmin, se.x[i]);
        xmax = std::max(xmax, se.x[i]);
        ymin = std::min(ymin, se.y[i]);
        ymax = std::max(ymax, se.y[i]);
      }
    if (!std::isfinite(xmin)) xmin = 0, xmax = 1, ymin = 0, ymax = 1;
    if (xmax == xmin) xmax = xmin + 1;
    if (ymax == ymin) {
      const double pad = std::max(std::abs(ymin) * 1e-3, 1e-12);
      ymin -= pad;
      ymax += pad;
    }
    const double ypad = 0.05 * (ymax - ymin);
    ymin -= ypad;
    ymax += ypad;
    auto X = [&](double v) { return left + (v - xmin) / (xmax - xmin) * (right - left); };
    auto Y = [&](double v) { return bottom - (v - ymin) / (ymax - ymin) * (bottom - top); };

    s << "<g>\n<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << right - left << "\" height=\""
      << bottom - top << "\" fill=\"none\" stroke=\"#444\"/>\n";
    for (int k = 0; k <= 4; ++k) {
      const double xv = xmin + (xmax - xmin) * k / 4, yv = ymin + (ymax - ymin) * k / 4;
      s << "<text x=\"" << X(xv) << "\" y=\"" << bottom + 14 << "\" text-anchor=\"middle\">" << num(xv) << "</text>\n";
      s << "<text x=\"" << left - 4 << "\" y=\"" << Y(yv) + 4 << "\" text-anchor=\"end\">" << num(yv) << "</text>\n";
    }
    s << "<text x=\"" << (left + right) / 2 << "\" y=\"" << top - 10 << "\" text-anchor=\"middle\" font-size=\"13\">"
      << panel.title << "</text>\n";
    s << "<text x=\"" << (left + right) / 2 << "\" y=\"" << bottom + 32 << "\" text-anchor=\"middle\">" << panel.xlabel
      << "</text>\n";
    s << "<text transform=\"translate(" << x0 + 14 << ',' << (top + bottom) / 2
      << ") rotate(-90)\" text-anchor=\"middle\">" << panel.ylabel << "</text>\n";

    for (const auto& se : panel.series) {
      if (se.markers) {
        for (std::size_t i = 0; i < se.x.size(); ++i)
          s << "<circle cx=\"" << X(se.x[i]) << "\" cy=\"" << Y(se.y[i]) << "\" r=\"1.8\" fill=\"" << se.color
            << "\" fill-opacity=\"" << se.opacity << "\"/>\n";
      } else if (!se.x.empty()) {
        s << "<polyline fill=\"none\" stroke=\"" << se.color << "\" stroke-width=\"" << se.width
          << "\" stroke-opacity=\"" << se.opacity << "\" points=\"";
        for (std::size_t i = 0; i < se.x.size(); ++i) s << num(X(se.x[i])) << ',' << num(Y(se.y[i])) << ' ';
        s << "\"/>\n";
      }
    }
    s << "</g>\n";
  }
};

/// Left: value per node at the first and last time. Right: every node's trajectory.
inline SvgChart field_chart(const std::string& name, const std::string& unit, const std::vector<double>& times,
                            const std::vector<Eigen::VectorXd>& values, std::size_t max_points = 240) {
  SvgChart chart;
  SvgChart::Panel left{name + ": initial and final", "node", name + " (" + unit + ")", {}};
  SvgChart::Series first{{}, {}, "#1f77b4", true}, last{{}, {}, "#ff7f0e", true};
  const Eigen::Index n = values.empty() ? 0 : values.front().size();
  for (Eigen::Index j = 0; j < n; ++j) {
    first.x.push_back(static_cast<double>(j + 1));
    first.y.push_back(values.front()[j]);
    last.x.push_back(static_cast<double>(j + 1));
    last.y.push_back(values.back()[j]);
  }
  left.series = {first, last};

  SvgChart::Panel right{name + " over time", "time (s)", name + " (" + unit + ")", {}};
  const std::size_t stride = std::max<std::size_t>(1, times.size() / max_points);
  for (Eigen::Index j = 0; j < n; ++j) {
    SvgChart::Series tr{{}, {}, "#2a6f97", false, 0.6, 0.35};
    for (std::size_t k = 0; k < times.size(); k += stride) {
      tr.x.push_back(times[k] * 86400.0);
      tr.y.push_back(values[k][j]);
    }
    if ((times.size() - 1) % stride != 0) {
      tr.x.push_back(times.back() * 86400.0);
      tr.y.push_back(values.back()[j]);
    }
    right.series.push_back(std::move(tr));
  }
  chart.panels = {left, right};
  return chart;
}

}  // namespace kansa::app
