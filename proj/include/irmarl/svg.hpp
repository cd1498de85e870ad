#pragma once

#include <string>
#include <vector>

namespace irmarl {

// Minimal line-plot writer (axes, ticks, legend, one polyline per series);
// keeps plotting dependency-free.
struct SvgSeries {
  std::string label;
  std::string color;
  std::vector<double> ys;
};

void write_line_plot(const std::string& path, const std::string& title,
                     const std::string& x_label, const std::string& y_label,
                     const std::vector<double>& xs, const std::vector<SvgSeries>& series);

}  // namespace irmarl
