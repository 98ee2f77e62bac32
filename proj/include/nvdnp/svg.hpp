#pragma once

#include <string>
#include <vector>

// Minimal native SVG 1.1 line plot, used by the CLI for --plot output.

namespace nvdnp {

struct PlotSeries {
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#1f6fb2";
};

std::string render_line_plot(const std::vector<PlotSeries>& series,
                             const std::string& title,
                             const std::string& x_label,
                             const std::string& y_label,
                             int width = 720, int height = 480);

}  // namespace nvdnp
