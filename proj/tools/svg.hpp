#ifndef WAVETRAIN_TOOLS_SVG_HPP
#define WAVETRAIN_TOOLS_SVG_HPP

// Static line plots as standalone SVG. Output depends only on the inputs.

#include <string>
#include <vector>

namespace wtcli {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::string colour = "#1f77b4";
};

struct Plot {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
  /// Optional horizontal reference line (e.g. a plateau estimate).
  bool has_reference = false;
  double reference_y = 0.0;
  std::string reference_label;
};

std::string render_svg(const Plot& plot);
void write_svg(const Plot& plot, const std::string& path);

}  // namespace wtcli

#endif  // WAVETRAIN_TOOLS_SVG_HPP
