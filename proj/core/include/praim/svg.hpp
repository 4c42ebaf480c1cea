#pragma once

#include <string>
#include <utility>
#include <vector>

namespace praim::plot {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;  // same length as x; non-finite points are skipped
};

struct LineChartOptions {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool diagonal = false;  // draw the y = x reference line
  bool markers = false;   // draw a dot at every point
};

// Self-contained SVG document. Output is a pure function of the inputs, so
// identical data renders byte-identical files.
std::string line_chart(const std::vector<Series>& series,
                       const LineChartOptions& options);

struct GroupedBars {
  std::vector<std::string> categories;  // x-axis buckets
  // One entry per method: label plus one value per category.
  std::vector<std::pair<std::string, std::vector<double>>> groups;
};

std::string bar_chart(const GroupedBars& bars, const std::string& title,
                      const std::string& x_label, const std::string& y_label);

}  // namespace praim::plot
