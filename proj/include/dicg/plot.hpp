#pragma once

#include <string>
#include <vector>

namespace dicg {

struct PlotGroup {
  std::string label;
  std::vector<std::string> csv_paths;  // seeds of one run group
};

// Learning-curve SVG: per group, the mean polyline across files and a shaded
// per-x min/max band. Malformed CSV rows are skipped; returned strings are
// warnings. Pure text output, no external renderer.
std::vector<std::string> emit_plot(const std::vector<PlotGroup>& groups,
                                   const std::string& x_column, const std::string& y_column,
                                   const std::string& out_svg_path);

}  // namespace dicg
