#pragma once

#include <string>
#include <vector>

namespace proxama::plot {

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

struct ChartSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_y = false;
};

/// Polyline chart with axes, tick labels and a legend, as an SVG document.
/// Non-finite points (and non-positive ones on a log axis) are skipped.
std::string line_chart_svg(const ChartSpec& spec, const std::vector<Series>& series);

}  // namespace proxama::plot
