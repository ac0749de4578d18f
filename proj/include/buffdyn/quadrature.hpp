#pragma once

#include <array>
#include <cmath>

#include "buffdyn/numeric.hpp"

namespace buffdyn {
namespace quad {

// 16-node Gauss-Legendre nodes/weights on [-1,1] (positive half; mirrored).
inline constexpr std::array<double, 8> gl16_x = {
    0.0950125098376374, 0.2816035507792589, 0.4580167776572274, 0.6178762444026438,
    0.7554044083550030, 0.8656312023878318, 0.9445750230732326, 0.9894009349916499};
inline constexpr std::array<double, 8> gl16_w = {
    0.1894506104550685, 0.1826034150449236, 0.1691565193950025, 0.1495959888165767,
    0.1246289712555339, 0.0951585116824928, 0.0622535239386479, 0.0271524594117541};

template <class F>
cplx gl16(F&& f, cplx a, cplx b) {
  cplx mid = 0.5 * (a + b), half = 0.5 * (b - a);
  cplx sum = 0.0;
  for (int k = 0; k < 8; ++k) {
    sum += gl16_w[k] * (f(mid + gl16_x[k] * half) + f(mid - gl16_x[k] * half));
  }
  return sum * half;
}

template <class F>
cplx segment_adaptive(F&& f, cplx a, cplx b, double tol, int depth, int& budget) {
  cplx whole = gl16(f, a, b);
  cplx m = 0.5 * (a + b);
  cplx left = gl16(f, a, m);
  cplx right = gl16(f, m, b);
  if (std::abs(whole - left - right) <= tol) return left + right;
  if (depth >= 14 || budget <= 0)
    fail(errc::no_convergence, "adaptive quadrature hit the subdivision cap");
  budget -= 2;
  return segment_adaptive(f, a, m, 0.5 * tol, depth + 1, budget) +
         segment_adaptive(f, m, b, 0.5 * tol, depth + 1, budget);
}

/// Integral of f over the segment [a,b]; bisects until two levels agree to
/// 1e-10 (relative to the running scale), hard cap 2^14 sub-segments.
template <class F>
cplx integrate_segment(F&& f, cplx a, cplx b, double tol = 1e-10) {
  if (a == b) return cplx(0.0);
  int budget = 1 << 14;
  cplx v = segment_adaptive(f, a, b, tol, 0, budget);
  require_finite(v, "integrate_segment");
  return v;
}

/// (1/2pi i) * contour integral of f on |z-center| = radius, trapezoid rule
/// with node doubling until successive estimates agree to `tol` or reach the
/// cancellation noise floor of the sum.
template <class F>
cplx circle_residue(F&& f, cplx center, double radius, double tol = 1e-10) {
  cplx prev = 0.0;
  bool have_prev = false;
  for (int nodes = 32; nodes <= (1 << 16); nodes *= 2) {
    cplx sum = 0.0;
    double scale = 0.0;
    for (int j = 0; j < nodes; ++j) {
      double th = 2.0 * pi * j / nodes;
      cplx e{std::cos(th), std::sin(th)};
      // dz = i r e^{i theta} d theta; the 1/(2 pi i) cancels to r e / nodes.
      cplx val = f(center + radius * e);
      scale = std::max(scale, std::abs(val));
      sum += val * e;
    }
    sum *= radius / double(nodes);
    require_finite(sum, "circle_residue");
    double noise = 1e-16 * scale * radius * std::sqrt(double(nodes));
    if (have_prev && std::abs(sum - prev) <= std::max(tol * std::max(1.0, std::abs(sum)),
                                                      8.0 * noise))
      return sum;
    prev = sum;
    have_prev = true;
  }
  fail(errc::quadrature_failure, "contour estimates did not stabilize");
}

}  // namespace quad
}  // namespace buffdyn
