#pragma once

#include <string>
#include <vector>

namespace steincover::svg {

struct CurvePoint {
  double x = 0.0;
  double y = 0.0;
  double half_width = 0.0;  // error-bar half width around y; 0 draws none
};

struct CoverageCurve {
  std::string label;
  std::vector<CurvePoint> points;
};

// Writes a single line chart: one polyline per curve (a lone marker when a
// curve has one point), point markers, optional error bars, a dashed
// horizontal reference line, axes with ticks and a legend. Throws
// invalid_argument when curves is empty or a curve has no points, and
// runtime_error when the file cannot be written.
void render_svg(const std::vector<CoverageCurve>& curves, double reference,
                const std::string& x_label, const std::string& y_label,
                const std::string& path);

}  // namespace steincover::svg
