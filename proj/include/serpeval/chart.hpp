#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace serpeval {

/// Grouped bar chart: one cluster per group, one bar per series.
struct BarChart {
  std::string title;
  std::string y_label;
  std::vector<std::string> groups;
  std::vector<std::string> series;
  std::vector<std::vector<std::optional<double>>> values;  // [group][series]
  std::optional<double> y_max;
};

struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;  // row-major, 3 bytes per pixel
};

Image render_bar_chart(const BarChart& chart);

/// Throws IoError.
void write_png(const Image& image, const std::filesystem::path& path);

}  // namespace serpeval
