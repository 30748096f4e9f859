#include "svgplot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "errors.hpp"

namespace fcmpc {

namespace {

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void include(double v) {
    if (std::isfinite(v)) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  void pad() {
    if (!(lo < hi)) {
      lo -= 1.0;
      hi += 1.0;
    }
    const double margin = 0.06 * (hi - lo);
    lo -= margin;
    hi += margin;
  }
};

std::string fmt(double v, const char* spec = "%.2f") {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

std::string tick_label(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

}  // namespace

void render_svg(const std::string& path, const std::string& title, const std::string& xlabel,
                const std::vector<SvgPanel>& panels, double x_min, double x_max) {
  if (panels.empty()) throw ConfigError("render_svg: no panels");
  if (!(x_max > x_min)) throw ConfigError("render_svg: empty x range");

  const double width = 920.0;
  const double panel_h = 240.0;
  const double top = 46.0, bottom = 46.0, left = 72.0, right = 72.0;
  const double plot_w = width - left - right;
  const double height = top + bottom + panel_h * panels.size();

  std::ofstream f(path);
  if (!f) throw IoError("render_svg: cannot open " + path);
  f << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(width, "%.0f")
    << "\" height=\"" << fmt(height, "%.0f") << "\" viewBox=\"0 0 " << fmt(width, "%.0f") << " "
    << fmt(height, "%.0f") << "\">\n";
  f << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  f << "<text x=\"" << fmt(width / 2) << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"15\""
    << " text-anchor=\"middle\">" << title << "</text>\n";

  const auto x_to_px = [&](double x) {
    return left + (x - x_min) / (x_max - x_min) * plot_w;
  };

  for (std::size_t pi = 0; pi < panels.size(); ++pi) {
    const SvgPanel& panel = panels[pi];
    const double py0 = top + panel_h * pi + 16.0;          // panel plot top
    const double py1 = top + panel_h * (pi + 1) - 26.0;    // panel plot bottom
    const double plot_h = py1 - py0;

    Range yr;
    for (const auto& s : panel.series) {
      for (const auto& [x, y] : s.points) yr.include(y);
    }
    for (const auto& h : panel.hlines) yr.include(h.y);
    yr.pad();

    Range yr_r;
    for (const auto& s : panel.right_series) {
      for (const auto& [x, y] : s.points) yr_r.include(y);
    }
    if (!panel.right_series.empty()) yr_r.pad();

    const auto y_to_px = [&](double y) { return py1 - (y - yr.lo) / (yr.hi - yr.lo) * plot_h; };
    const auto yr_to_px = [&](double y) {
      return py1 - (y - yr_r.lo) / (yr_r.hi - yr_r.lo) * plot_h;
    };

    // Frame and ticks.
    f << "<rect x=\"" << fmt(left) << "\" y=\"" << fmt(py0) << "\" width=\"" << fmt(plot_w)
      << "\" height=\"" << fmt(plot_h) << "\" fill=\"none\" stroke=\"#333\"/>\n";
    for (int t = 0; t <= 5; ++t) {
      const double xv = x_min + (x_max - x_min) * t / 5.0;
      const double xp = x_to_px(xv);
      f << "<line x1=\"" << fmt(xp) << "\" y1=\"" << fmt(py1) << "\" x2=\"" << fmt(xp)
        << "\" y2=\"" << fmt(py1 + 5) << "\" stroke=\"#333\"/>\n";
      if (pi + 1 == panels.size()) {
        f << "<text x=\"" << fmt(xp) << "\" y=\"" << fmt(py1 + 18)
          << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">"
          << tick_label(xv) << "</text>\n";
      }
    }
    for (int t = 0; t <= 4; ++t) {
      const double yv = yr.lo + (yr.hi - yr.lo) * t / 4.0;
      const double yp = y_to_px(yv);
      f << "<line x1=\"" << fmt(left - 5) << "\" y1=\"" << fmt(yp) << "\" x2=\"" << fmt(left)
        << "\" y2=\"" << fmt(yp) << "\" stroke=\"#333\"/>\n";
      f << "<text x=\"" << fmt(left - 8) << "\" y=\"" << fmt(yp + 4)
        << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">"
        << fmt(yv, "%.3g") << "</text>\n";
    }
    if (!panel.right_series.empty()) {
      for (int t = 0; t <= 4; ++t) {
        const double yv = yr_r.lo + (yr_r.hi - yr_r.lo) * t / 4.0;
        const double yp = yr_to_px(yv);
        f << "<text x=\"" << fmt(left + plot_w + 8) << "\" y=\"" << fmt(yp + 4)
          << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"start\">"
          << fmt(yv, "%.3g") << "</text>\n";
      }
      f << "<text x=\"" << fmt(left + plot_w + 52) << "\" y=\"" << fmt((py0 + py1) / 2)
        << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\""
        << " transform=\"rotate(90 " << fmt(left + plot_w + 52) << " " << fmt((py0 + py1) / 2)
        << ")\">" << panel.right_ylabel << "</text>\n";
    }
    f << "<text x=\"" << fmt(left - 50) << "\" y=\"" << fmt((py0 + py1) / 2)
      << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\""
      << " transform=\"rotate(-90 " << fmt(left - 50) << " " << fmt((py0 + py1) / 2) << ")\">"
      << panel.ylabel << "</text>\n";

    // Horizontal marker lines.
    for (const auto& h : panel.hlines) {
      const double yp = y_to_px(h.y);
      f << "<line x1=\"" << fmt(left) << "\" y1=\"" << fmt(yp) << "\" x2=\"" << fmt(left + plot_w)
        << "\" y2=\"" << fmt(yp) << "\" stroke=\"" << h.color
        << "\" stroke-dasharray=\"6 4\"/>\n";
      if (!h.label.empty()) {
        f << "<text x=\"" << fmt(left + 6) << "\" y=\"" << fmt(yp - 4)
          << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"" << h.color << "\">"
          << h.label << "</text>\n";
      }
    }

    // Series and legend.
    double legend_x = left + 10.0, legend_y = py0 + 14.0;
    auto draw_series = [&](const SvgSeries& s, bool right_axis) {
      if (s.points.empty()) return;
      f << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.3\"";
      if (s.dashed) f << " stroke-dasharray=\"4 3\"";
      f << " points=\"";
      for (const auto& [x, y] : s.points) {
        f << fmt(x_to_px(x)) << "," << fmt(right_axis ? yr_to_px(y) : y_to_px(y)) << " ";
      }
      f << "\"/>\n";
      if (!s.label.empty()) {
        f << "<text x=\"" << fmt(legend_x) << "\" y=\"" << fmt(legend_y)
          << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"" << s.color << "\">"
          << s.label << "</text>\n";
        legend_y += 14.0;
      }
    };
    for (const auto& s : panel.series) draw_series(s, false);
    for (const auto& s : panel.right_series) draw_series(s, true);
  }

  f << "<text x=\"" << fmt(left + plot_w / 2) << "\" y=\"" << fmt(height - 10)
    << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">" << xlabel
    << "</text>\n";
  f << "</svg>\n";
  f.close();
  if (!f) throw IoError("render_svg: write failed for " + path);
}

}  // namespace fcmpc
