#include "irmarl/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace irmarl {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

void write_line_plot(const std::string& path, const std::string& title,
                     const std::string& x_label, const std::string& y_label,
                     const std::vector<double>& xs, const std::vector<SvgSeries>& series) {
  if (xs.empty() || series.empty()) throw std::invalid_argument("write_line_plot: empty data");
  double x_min = xs.front(), x_max = xs.front();
  for (double x : xs) {
    x_min = std::min(x_min, x);
    x_max = std::max(x_max, x);
  }
  double y_min = series[0].ys.at(0), y_max = y_min;
  for (const auto& s : series) {
    if (s.ys.size() != xs.size())
      throw std::invalid_argument("write_line_plot: series length mismatch");
    for (double y : s.ys) {
      y_min = std::min(y_min, y);
      y_max = std::max(y_max, y);
    }
  }
  if (x_max == x_min) x_max = x_min + 1.0;
  if (y_max == y_min) y_max = y_min + 1.0;

  const double w = 640, h = 420, ml = 70, mr = 20, mt = 40, mb = 55;
  auto px = [&](double x) { return ml + (x - x_min) / (x_max - x_min) * (w - ml - mr); };
  auto py = [&](double y) { return h - mb - (y - y_min) / (y_max - y_min) * (h - mt - mb); };

  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_line_plot: cannot open " + path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << w / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"15\">" << title
      << "</text>\n";
  // Axes
  out << "<line x1=\"" << ml << "\" y1=\"" << h - mb << "\" x2=\"" << w - mr << "\" y2=\""
      << h - mb << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << h - mb
      << "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 5; ++t) {
    const double xv = x_min + (x_max - x_min) * t / 5.0;
    const double yv = y_min + (y_max - y_min) * t / 5.0;
    out << "<line x1=\"" << px(xv) << "\" y1=\"" << h - mb << "\" x2=\"" << px(xv) << "\" y2=\""
        << h - mb + 4 << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << px(xv) << "\" y=\"" << h - mb + 17 << "\" text-anchor=\"middle\">"
        << fmt(xv) << "</text>\n";
    out << "<line x1=\"" << ml - 4 << "\" y1=\"" << py(yv) << "\" x2=\"" << ml << "\" y2=\""
        << py(yv) << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << ml - 7 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\">"
        << fmt(yv) << "</text>\n";
  }
  out << "<text x=\"" << (ml + w - mr) / 2 << "\" y=\"" << h - 12
      << "\" text-anchor=\"middle\">" << x_label << "</text>\n";
  out << "<text x=\"16\" y=\"" << (mt + h - mb) / 2
      << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " << (mt + h - mb) / 2 << ")\">"
      << y_label << "</text>\n";
  // Series
  for (std::size_t s = 0; s < series.size(); ++s) {
    out << "<polyline fill=\"none\" stroke=\"" << series[s].color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < xs.size(); ++i)
      out << px(xs[i]) << "," << py(series[s].ys[i]) << " ";
    out << "\"/>\n";
    const double ly = mt + 16.0 * static_cast<double>(s);
    out << "<line x1=\"" << w - mr - 130 << "\" y1=\"" << ly << "\" x2=\"" << w - mr - 110
        << "\" y2=\"" << ly << "\" stroke=\"" << series[s].color << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << w - mr - 105 << "\" y=\"" << ly + 4 << "\">" << series[s].label
        << "</text>\n";
  }
  out << "</svg>\n";
  if (!out) throw std::runtime_error("write_line_plot: write failed for " + path);
}

}  // namespace irmarl
