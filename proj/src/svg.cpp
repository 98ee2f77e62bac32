#include "nvdnp/svg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "nvdnp/csv.hpp"

namespace nvdnp {

namespace {

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string render_line_plot(const std::vector<PlotSeries>& series,
                             const std::string& title,
                             const std::string& x_label,
                             const std::string& y_label,
                             int width, int height) {
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& s : series) {
    for (double v : s.x) { xmin = std::min(xmin, v); xmax = std::max(xmax, v); }
    for (double v : s.y) { ymin = std::min(ymin, v); ymax = std::max(ymax, v); }
  }
  if (!(xmin < xmax)) { xmin -= 0.5; xmax += 0.5; }
  if (!(ymin < ymax)) { ymin -= 0.5; ymax += 0.5; }
  const double ypad = 0.05 * (ymax - ymin);
  ymin -= ypad; ymax += ypad;

  const int ml = 70, mr = 20, mt = 36, mb = 50;
  const double pw = width - ml - mr, ph = height - mt - mb;
  auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double y) { return mt + (ymax - y) / (ymax - ymin) * ph; };

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << width
      << "\" height=\"" << height << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"#444\"/>\n";

  // axis ticks
  for (int k = 0; k <= 5; ++k) {
    const double xv = xmin + k * (xmax - xmin) / 5.0;
    const double yv = ymin + k * (ymax - ymin) / 5.0;
    svg << "<line x1=\"" << px(xv) << "\" y1=\"" << mt + ph << "\" x2=\"" << px(xv)
        << "\" y2=\"" << mt + ph + 5 << "\" stroke=\"#444\"/>\n"
        << "<text x=\"" << px(xv) << "\" y=\"" << mt + ph + 18
        << "\" font-size=\"11\" text-anchor=\"middle\">" << format_double(xv) << "</text>\n"
        << "<line x1=\"" << ml - 5 << "\" y1=\"" << py(yv) << "\" x2=\"" << ml << "\" y2=\""
        << py(yv) << "\" stroke=\"#444\"/>\n"
        << "<text x=\"" << ml - 8 << "\" y=\"" << py(yv) + 4
        << "\" font-size=\"11\" text-anchor=\"end\">" << format_double(yv) << "</text>\n";
  }

  for (const auto& s : series) {
    svg << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
    const std::size_t n = std::min(s.x.size(), s.y.size());
    for (std::size_t i = 0; i < n; ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      svg << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
    }
    svg << "\"/>\n";
  }

  svg << "<text x=\"" << width / 2 << "\" y=\"20\" font-size=\"14\" text-anchor=\"middle\">"
      << escape_xml(title) << "</text>\n"
      << "<text x=\"" << width / 2 << "\" y=\"" << height - 10
      << "\" font-size=\"12\" text-anchor=\"middle\">" << escape_xml(x_label) << "</text>\n"
      << "<text x=\"16\" y=\"" << height / 2
      << "\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 16 " << height / 2
      << ")\">" << escape_xml(y_label) << "</text>\n"
      << "</svg>\n";
  return svg.str();
}

}  // namespace nvdnp
