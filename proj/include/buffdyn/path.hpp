#pragma once

#include <cmath>
#include <vector>

#include "buffdyn/numeric.hpp"

namespace buffdyn {

/// A piecewise-linear path in the z-plane.
struct PathPolyline {
  std::vector<cplx> vertices;

  PathPolyline() = default;
  explicit PathPolyline(std::vector<cplx> v) : vertices(std::move(v)) {}

  static PathPolyline segment(cplx a, cplx b) { return PathPolyline({a, b}); }

  /// Closed circle, n chords, first vertex repeated at the end.
  static PathPolyline circle(cplx center, double r, int n, double theta0 = 0.0) {
    std::vector<cplx> v;
    v.reserve(size_t(n) + 1);
    for (int j = 0; j <= n; ++j) {
      double th = theta0 + 2.0 * pi * j / n;
      v.push_back(center + r * cplx{std::cos(th), std::sin(th)});
    }
    return PathPolyline(std::move(v));
  }
};

}  // namespace buffdyn
