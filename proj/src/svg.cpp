#include "steincover/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace steincover::svg {

namespace {

constexpr double kWidth = 760.0;
constexpr double kHeight = 480.0;
constexpr double kLeft = 72.0;
constexpr double kRight = 168.0;  // leaves room for the legend
constexpr double kTop = 28.0;
constexpr double kBottom = 56.0;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c",
                          "#9467bd", "#ff7f0e", "#8c564b"};
constexpr int kPaletteSize = 6;

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += ch;
    }
  }
  return out;
}

}  // namespace

void render_svg(const std::vector<CoverageCurve>& curves, double reference,
                const std::string& x_label, const std::string& y_label,
                const std::string& path) {
  if (curves.empty())
    throw std::invalid_argument("render_svg needs at least one curve");
  for (const auto& c : curves)
    if (c.points.empty())
      throw std::invalid_argument("curve '" + c.label + "' has no points");

  double x_lo = curves[0].points[0].x, x_hi = x_lo;
  double y_lo = reference, y_hi = reference;
  for (const auto& c : curves) {
    for (const auto& pt : c.points) {
      x_lo = std::min(x_lo, pt.x);
      x_hi = std::max(x_hi, pt.x);
      y_lo = std::min(y_lo, pt.y - pt.half_width);
      y_hi = std::max(y_hi, pt.y + pt.half_width);
    }
  }
  if (x_hi - x_lo < 1e-12) {
    x_lo -= 1.0;
    x_hi += 1.0;
  } else {
    double pad = 0.04 * (x_hi - x_lo);
    x_lo -= pad;
    x_hi += pad;
  }
  if (y_hi - y_lo < 1e-12) {
    y_lo -= 0.05;
    y_hi += 0.05;
  } else {
    double pad = 0.08 * (y_hi - y_lo);
    y_lo -= pad;
    y_hi += pad;
  }

  double plot_w = kWidth - kLeft - kRight;
  double plot_h = kHeight - kTop - kBottom;
  auto sx = [&](double v) { return kLeft + (v - x_lo) / (x_hi - x_lo) * plot_w; };
  auto sy = [&](double v) {
    return kHeight - kBottom - (v - y_lo) / (y_hi - y_lo) * plot_h;
  };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
      << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << " "
      << kHeight << "\">\n";
  out << "<rect width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" fill=\"white\"/>\n";

  // frame
  out << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << plot_w
      << "\" height=\"" << plot_h
      << "\" fill=\"none\" stroke=\"#333333\" stroke-width=\"1\"/>\n";

  constexpr int kTicks = 5;
  for (int i = 0; i < kTicks; ++i) {
    double fx = x_lo + (x_hi - x_lo) * i / (kTicks - 1.0);
    double px = sx(fx);
    out << "<line x1=\"" << num(px) << "\" y1=\"" << num(kHeight - kBottom)
        << "\" x2=\"" << num(px) << "\" y2=\""
        << num(kHeight - kBottom + 5.0)
        << "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
    out << "<text x=\"" << num(px) << "\" y=\"" << num(kHeight - kBottom + 20.0)
        << "\" font-size=\"12\" text-anchor=\"middle\" fill=\"#333333\">"
        << tick_label(fx) << "</text>\n";

    double fy = y_lo + (y_hi - y_lo) * i / (kTicks - 1.0);
    double py = sy(fy);
    out << "<line x1=\"" << num(kLeft - 5.0) << "\" y1=\"" << num(py)
        << "\" x2=\"" << num(kLeft) << "\" y2=\"" << num(py)
        << "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
    out << "<text x=\"" << num(kLeft - 8.0) << "\" y=\"" << num(py + 4.0)
        << "\" font-size=\"12\" text-anchor=\"end\" fill=\"#333333\">"
        << tick_label(fy) << "</text>\n";
  }

  out << "<text x=\"" << num(kLeft + plot_w / 2.0) << "\" y=\""
      << num(kHeight - 16.0)
      << "\" font-size=\"14\" text-anchor=\"middle\" fill=\"#333333\">"
      << xml_escape(x_label) << "</text>\n";
  out << "<text x=\"18\" y=\"" << num(kTop + plot_h / 2.0)
      << "\" font-size=\"14\" text-anchor=\"middle\" fill=\"#333333\" "
         "transform=\"rotate(-90 18 "
      << num(kTop + plot_h / 2.0) << ")\">" << xml_escape(y_label)
      << "</text>\n";

  // dashed reference level
  out << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(sy(reference))
      << "\" x2=\"" << num(kLeft + plot_w) << "\" y2=\"" << num(sy(reference))
      << "\" stroke=\"#777777\" stroke-width=\"1\" "
         "stroke-dasharray=\"6 4\"/>\n";

  for (std::size_t ci = 0; ci < curves.size(); ++ci) {
    const auto& curve = curves[ci];
    const char* color = kPalette[ci % kPaletteSize];
    if (curve.points.size() > 1) {
      out << "<polyline fill=\"none\" stroke=\"" << color
          << "\" stroke-width=\"1.5\" points=\"";
      for (std::size_t i = 0; i < curve.points.size(); ++i) {
        if (i) out << " ";
        out << num(sx(curve.points[i].x)) << "," << num(sy(curve.points[i].y));
      }
      out << "\"/>\n";
    }
    for (const auto& pt : curve.points) {
      double px = sx(pt.x);
      if (pt.half_width > 0.0) {
        double lo = sy(pt.y - pt.half_width);
        double hi = sy(pt.y + pt.half_width);
        out << "<line x1=\"" << num(px) << "\" y1=\"" << num(lo) << "\" x2=\""
            << num(px) << "\" y2=\"" << num(hi) << "\" stroke=\"" << color
            << "\" stroke-width=\"1\"/>\n";
        for (double py : {lo, hi})
          out << "<line x1=\"" << num(px - 3.0) << "\" y1=\"" << num(py)
              << "\" x2=\"" << num(px + 3.0) << "\" y2=\"" << num(py)
              << "\" stroke=\"" << color << "\" stroke-width=\"1\"/>\n";
      }
      out << "<circle cx=\"" << num(px) << "\" cy=\"" << num(sy(pt.y))
          << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    }
  }

  double lx = kLeft + plot_w + 14.0;
  double ly = kTop + 10.0;
  for (std::size_t ci = 0; ci < curves.size(); ++ci) {
    const char* color = kPalette[ci % kPaletteSize];
    out << "<line x1=\"" << num(lx) << "\" y1=\"" << num(ly) << "\" x2=\""
        << num(lx + 22.0) << "\" y2=\"" << num(ly) << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << num(lx + 28.0) << "\" y=\"" << num(ly + 4.0)
        << "\" font-size=\"12\" fill=\"#333333\">"
        << xml_escape(curves[ci].label) << "</text>\n";
    ly += 18.0;
  }

  out << "</svg>\n";

  std::ofstream file(path, std::ios::binary);
  if (!file)
    throw std::runtime_error("cannot open '" + path + "' for writing");
  file << out.str();
  file.flush();
  if (!file) throw std::runtime_error("failed while writing '" + path + "'");
}

}  // namespace steincover::svg
