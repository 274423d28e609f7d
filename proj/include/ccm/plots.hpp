#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace ccm {

struct PlotSeries {
  std::string label;
  std::vector<double> x, y;
  bool markers = false;  // scatter instead of polyline
};

struct PlotSpec {
  std::string title;
  std::string x_label, y_label;
  std::vector<PlotSeries> series;
  std::optional<double> reference;  // horizontal dashed line
};

/// Plain SVG line/scatter chart; identical input gives identical bytes.
std::string render_svg(const PlotSpec& spec);
void write_svg(const std::filesystem::path& path, const PlotSpec& spec);

}  // namespace ccm
