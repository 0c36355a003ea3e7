#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace balkwise::cli {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  bool points = false;  ///< markers instead of a polyline
};

struct PlotLabels {
  std::string title;
  std::string x;
  std::string y;
};

void write_line_plot(std::ostream& os, const std::vector<Series>& series,
                     const PlotLabels& labels);

void write_histogram(std::ostream& os, const std::vector<double>& sample, int bins,
                     const PlotLabels& labels, bool normal_overlay = true);

}  // namespace balkwise::cli
