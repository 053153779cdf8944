#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace spinhydro::harness {

struct SvgSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

/// Minimal static line plot: linear axes, ticks, legend. Non-finite points
/// break the line.
class SvgLinePlot {
 public:
  SvgLinePlot(std::string title, std::string x_label, std::string y_label);
  void add(SvgSeries series);
  std::string render(int width = 720, int height = 440) const;
  void write(const std::filesystem::path& path) const;

 private:
  std::string title_, x_label_, y_label_;
  std::vector<SvgSeries> series_;
};

}  // namespace spinhydro::harness
