#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace wtcli {

namespace {

constexpr double kWidth = 800, kHeight = 500;
constexpr double kLeft = 80, kRight = 20, kTop = 40, kBottom = 60;
constexpr std::size_t kMaxVertices = 4000;

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  return buf;
}

std::string tick(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void finish() {
    if (!(lo <= hi)) lo = 0.0, hi = 1.0;
    if (hi - lo < 1e-12 * std::max(1.0, std::abs(hi))) {
      lo -= 0.5;
      hi += 0.5;
    }
  }
};

}  // namespace

std::string render_svg(const Plot& plot) {
  Range xr, yr;
  for (const auto& s : plot.series) {
    for (double x : s.x) xr.add(x);
    for (double y : s.y) yr.add(y);
  }
  if (plot.has_reference) yr.add(plot.reference_y);
  xr.finish();
  yr.finish();

  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - xr.lo) / (xr.hi - xr.lo) * pw; };
  auto py = [&](double y) { return kTop + (yr.hi - y) / (yr.hi - yr.lo) * ph; };

  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << num(kWidth / 2) << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
     << "font-size=\"16\">" << escape(plot.title) << "</text>\n";
  os << "<rect x=\"" << num(kLeft) << "\" y=\"" << num(kTop) << "\" width=\"" << num(pw) << "\" height=\"" << num(ph)
     << "\" fill=\"none\" stroke=\"black\"/>\n";

  for (int i = 0; i <= 4; ++i) {
    const double fx = xr.lo + (xr.hi - xr.lo) * i / 4.0;
    const double fy = yr.lo + (yr.hi - yr.lo) * i / 4.0;
    os << "<text x=\"" << num(px(fx)) << "\" y=\"" << num(kTop + ph + 18)
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << tick(fx) << "</text>\n";
    os << "<text x=\"" << num(kLeft - 6) << "\" y=\"" << num(py(fy) + 4)
       << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << tick(fy) << "</text>\n";
  }
  os << "<text x=\"" << num(kLeft + pw / 2) << "\" y=\"" << num(kHeight - 14)
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" << escape(plot.x_label)
     << "</text>\n";
  os << "<text x=\"18\" y=\"" << num(kTop + ph / 2) << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
     << "font-size=\"13\" transform=\"rotate(-90 18 " << num(kTop + ph / 2) << ")\">" << escape(plot.y_label)
     << "</text>\n";

  double legend_y = kTop + 16;
  for (const auto& s : plot.series) {
    const std::size_t n = std::min(s.x.size(), s.y.size());
    const std::size_t stride = std::max<std::size_t>(1, (n + kMaxVertices - 1) / kMaxVertices);
    os << "<polyline fill=\"none\" stroke=\"" << escape(s.colour) << "\" stroke-width=\"1.2\" points=\"";
    bool first = true;
    for (std::size_t i = 0; i < n; i += stride) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      os << (first ? "" : " ") << num(px(s.x[i])) << "," << num(py(s.y[i]));
      first = false;
    }
    os << "\"/>\n";
    if (!s.label.empty()) {
      os << "<line x1=\"" << num(kLeft + pw - 130) << "\" y1=\"" << num(legend_y - 4) << "\" x2=\""
         << num(kLeft + pw - 110) << "\" y2=\"" << num(legend_y - 4) << "\" stroke=\"" << escape(s.colour)
         << "\" stroke-width=\"2\"/>\n";
      os << "<text x=\"" << num(kLeft + pw - 104) << "\" y=\"" << num(legend_y)
         << "\" font-family=\"sans-serif\" font-size=\"12\">" << escape(s.label) << "</text>\n";
      legend_y += 16;
    }
  }
  if (plot.has_reference) {
    os << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(py(plot.reference_y)) << "\" x2=\"" << num(kLeft + pw)
       << "\" y2=\"" << num(py(plot.reference_y)) << "\" stroke=\"#d62728\" stroke-dasharray=\"6,4\"/>\n";
    os << "<text x=\"" << num(kLeft + 6) << "\" y=\"" << num(py(plot.reference_y) - 6)
       << "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#d62728\">" << escape(plot.reference_label)
       << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

void write_svg(const Plot& plot, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << render_svg(plot);
  if (!out) throw std::runtime_error("error writing '" + path + "'");
}

}  // namespace wtcli
