#pragma once

// Minimal SVG line charts for sweep results: one chart per metric, one
// polyline per algorithm, SNR on the x axis. BER uses a log10 y axis.

#include <iosfwd>
#include <string>
#include <vector>

#include "hbf/harness.hpp"

namespace hbf::plot {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct ChartSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_y = false;
  int width = 640;
  int height = 420;
};

void write_svg(std::ostream& os, const ChartSpec& spec, const std::vector<Series>& series);

/// Groups records of one metric by algorithm.
std::vector<Series> series_for_metric(const std::vector<harness::SweepRecord>& records,
                                      harness::Metric metric);

/// Writes <prefix>_<metric>.svg for each metric present; returns the paths.
std::vector<std::string> write_sweep_plots(const std::string& prefix,
                                           const std::vector<harness::SweepRecord>& records);

}  // namespace hbf::plot
