#pragma once

#include <cstdio>
#include <string>
#include <vector>

#include "buffdyn/path.hpp"

namespace buffdyn {

/// Minimal deterministic SVG emitter: world coordinates scaled into a fixed
/// canvas, y axis pointing up, no timestamps or metadata.
class SvgFigure {
 public:
  SvgFigure(double xmin, double xmax, double ymin, double ymax, int px = 800)
      : xmin_(xmin), xmax_(xmax), ymin_(ymin), ymax_(ymax), px_(px) {
    double aspect = (ymax_ - ymin_) / (xmax_ - xmin_);
    py_ = int(px_ * aspect + 0.5);
  }

  void polyline(const std::vector<cplx>& pts, const std::string& color, double width = 1.0) {
    if (pts.size() < 2) return;
    std::string d = "M";
    for (size_t k = 0; k < pts.size(); ++k) {
      if (k) d += " L";
      d += coord(pts[k]);
    }
    body_ += "<path d=\"" + d + "\" fill=\"none\" stroke=\"" + color + "\" stroke-width=\"" +
             num(width) + "\"/>\n";
  }

  void circle(cplx center, double world_radius, const std::string& fill) {
    body_ += "<circle cx=\"" + num(sx(center.real())) + "\" cy=\"" + num(sy(center.imag())) +
             "\" r=\"" + num(world_radius * px_ / (xmax_ - xmin_)) + "\" fill=\"" + fill +
             "\"/>\n";
  }

  void dot(cplx center, double pixel_radius, const std::string& fill) {
    body_ += "<circle cx=\"" + num(sx(center.real())) + "\" cy=\"" + num(sy(center.imag())) +
             "\" r=\"" + num(pixel_radius) + "\" fill=\"" + fill + "\"/>\n";
  }

  void ring(cplx center, double world_radius, const std::string& color, double width = 1.0) {
    body_ += "<circle cx=\"" + num(sx(center.real())) + "\" cy=\"" + num(sy(center.imag())) +
             "\" r=\"" + num(world_radius * px_ / (xmax_ - xmin_)) + "\" fill=\"none\" stroke=\"" +
             color + "\" stroke-width=\"" + num(width) + "\"/>\n";
  }

  void text(double x_px, double y_px, const std::string& s) {
    body_ += "<text x=\"" + num(x_px) + "\" y=\"" + num(y_px) +
             "\" font-family=\"monospace\" font-size=\"13\">" + s + "</text>\n";
  }

  std::string str() const {
    std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
                      std::to_string(px_) + "\" height=\"" + std::to_string(py_) +
                      "\" viewBox=\"0 0 " + std::to_string(px_) + " " + std::to_string(py_) +
                      "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out += body_;
    out += "</svg>\n";
    return out;
  }

  static const char* palette(int k) {
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                   "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
    return colors[k % 8];
  }

 private:
  static std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
  }
  double sx(double x) const { return (x - xmin_) / (xmax_ - xmin_) * px_; }
  double sy(double y) const { return (ymax_ - y) / (ymax_ - ymin_) * py_; }
  std::string coord(cplx z) const { return num(sx(z.real())) + " " + num(sy(z.imag())); }

  double xmin_, xmax_, ymin_, ymax_;
  int px_, py_;
  std::string body_;
};

}  // namespace buffdyn
