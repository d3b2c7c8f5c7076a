#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

namespace gripstream::cli {

struct PlotSeries {
  std::string label;
  std::vector<std::pair<double, double>> points;  // (x, y)
};

struct PlotStyle {
  std::string title = "Grip force profile";
  std::string x_label = "task time (s)";
  std::string y_label = "force (N)";
  int width = 800;
  int height = 480;
};

// One <polyline> per non-empty series, a legend entry per series, labelled
// axes with five ticks each. Output depends only on the arguments. Throws
// InsufficientDataError when no series has points.
std::string render_profile_svg(std::span<const PlotSeries> series, const PlotStyle& style = {});

}  // namespace gripstream::cli
