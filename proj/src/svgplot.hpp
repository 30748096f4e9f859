#pragma once

#include <string>
#include <utility>
#include <vector>

namespace fcmpc {

// Minimal deterministic SVG line charts; no external plotting dependency.

struct SvgSeries {
  std::string label;
  std::string color;
  std::vector<std::pair<double, double>> points;
  bool dashed = false;
};

struct SvgHLine {
  double y = 0.0;
  std::string label;
  std::string color = "#c0392b";
};

struct SvgPanel {
  std::string ylabel;
  std::vector<SvgSeries> series;
  std::vector<SvgHLine> hlines;
  std::vector<SvgSeries> right_series;  // drawn against a secondary y-axis
  std::string right_ylabel;
};

// Stacked panels sharing the x-axis [x_min, x_max].
void render_svg(const std::string& path, const std::string& title, const std::string& xlabel,
                const std::vector<SvgPanel>& panels, double x_min, double x_max);

}  // namespace fcmpc
