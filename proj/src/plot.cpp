#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "dicg/metrics.hpp"
#include "dicg/plot.hpp"

namespace dicg {

namespace {

constexpr double kWidth = 860, kHeight = 520;
constexpr double kLeft = 70, kRight = 20, kTop = 40, kBottom = 55;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

struct Series {
  // x -> (mean, min, max) across the group's files
  std::vector<std::array<double, 4>> points;  // x, mean, lo, hi
};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

std::vector<std::string> emit_plot(const std::vector<PlotGroup>& groups,
                                   const std::string& x_column, const std::string& y_column,
                                   const std::string& out_svg_path) {
  std::vector<std::string> warnings;
  std::vector<Series> series(groups.size());

  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;

  for (size_t g = 0; g < groups.size(); ++g) {
    std::map<double, std::vector<double>> by_x;
    for (const auto& path : groups[g].csv_paths) {
      CsvTable t;
      try {
        t = read_csv_lenient(path, &warnings);
      } catch (const std::exception& e) {
        warnings.push_back(std::string(e.what()));
        continue;
      }
      const int xi = t.column_index(x_column);
      const int yi = t.column_index(y_column);
      if (xi < 0 || yi < 0) {
        warnings.push_back(path + ": missing column '" + (xi < 0 ? x_column : y_column) + "'");
        continue;
      }
      for (const auto& row : t.rows) by_x[row[xi]].push_back(row[yi]);
    }
    for (const auto& [x, ys] : by_x) {
      double lo = ys[0], hi = ys[0], sum = 0.0;
      for (double y : ys) {
        lo = std::min(lo, y);
        hi = std::max(hi, y);
        sum += y;
      }
      series[g].points.push_back({x, sum / ys.size(), lo, hi});
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, lo);
      ymax = std::max(ymax, hi);
    }
  }

  const bool empty = !(xmin <= xmax);
  if (empty) {
    warnings.push_back("no plottable data; writing an empty plot");
    xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  }
  if (xmax == xmin) xmax = xmin + 1;
  if (ymax == ymin) {
    ymax += 0.5;
    ymin -= 0.5;
  }
  const double ypad = 0.05 * (ymax - ymin);
  ymin -= ypad;
  ymax += ypad;

  auto px = [&](double x) { return kLeft + (x - xmin) / (xmax - xmin) * (kWidth - kLeft - kRight); };
  auto py = [&](double y) {
    return kHeight - kBottom - (y - ymin) / (ymax - ymin) * (kHeight - kTop - kBottom);
  };

  std::ofstream os(out_svg_path, std::ios::trunc);
  if (!os) throw std::runtime_error("plot: cannot open '" + out_svg_path + "' for writing");
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  // Axes and ticks.
  os << "<line x1=\"" << kLeft << "\" y1=\"" << kHeight - kBottom << "\" x2=\"" << kWidth - kRight
     << "\" y2=\"" << kHeight - kBottom << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\""
     << kHeight - kBottom << "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 5; ++t) {
    const double x = xmin + (xmax - xmin) * t / 5.0;
    const double y = ymin + (ymax - ymin) * t / 5.0;
    os << "<line x1=\"" << px(x) << "\" y1=\"" << kHeight - kBottom << "\" x2=\"" << px(x)
       << "\" y2=\"" << kHeight - kBottom + 5 << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << px(x) << "\" y=\"" << kHeight - kBottom + 20
       << "\" font-size=\"12\" text-anchor=\"middle\">" << fmt(x) << "</text>\n";
    os << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << py(y) << "\" x2=\"" << kLeft << "\" y2=\""
       << py(y) << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << kLeft - 8 << "\" y=\"" << py(y) + 4
       << "\" font-size=\"12\" text-anchor=\"end\">" << fmt(y) << "</text>\n";
  }
  os << "<text x=\"" << (kLeft + kWidth - kRight) / 2 << "\" y=\"" << kHeight - 12
     << "\" font-size=\"14\" text-anchor=\"middle\">" << x_column << "</text>\n";
  os << "<text x=\"18\" y=\"" << (kTop + kHeight - kBottom) / 2
     << "\" font-size=\"14\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
     << (kTop + kHeight - kBottom) / 2 << ")\">" << y_column << "</text>\n";

  for (size_t g = 0; g < series.size(); ++g) {
    const char* color = kPalette[g % 6];
    const auto& pts = series[g].points;
    if (pts.empty()) continue;
    // min/max band
    os << "<polygon fill=\"" << color << "\" fill-opacity=\"0.18\" stroke=\"none\" points=\"";
    for (const auto& p : pts) os << px(p[0]) << "," << py(p[2]) << " ";
    for (auto it = pts.rbegin(); it != pts.rend(); ++it) os << px((*it)[0]) << "," << py((*it)[3]) << " ";
    os << "\"/>\n";
    // mean line
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (const auto& p : pts) os << px(p[0]) << "," << py(p[1]) << " ";
    os << "\"/>\n";
    // legend
    const double ly = kTop + 18.0 * g;
    os << "<rect x=\"" << kWidth - kRight - 150 << "\" y=\"" << ly - 10
       << "\" width=\"12\" height=\"12\" fill=\"" << color << "\"/>\n";
    os << "<text x=\"" << kWidth - kRight - 132 << "\" y=\"" << ly
       << "\" font-size=\"12\">" << groups[g].label << "</text>\n";
  }
  os << "</svg>\n";
  if (!os) throw std::runtime_error("plot: write failed for '" + out_svg_path + "'");
  return warnings;
}

}  // namespace dicg
