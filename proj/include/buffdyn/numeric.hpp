#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "buffdyn/error.hpp"

namespace buffdyn {

using cplx = std::complex<double>;

inline constexpr double pi = std::numbers::pi;
inline const cplx iunit{0.0, 1.0};

inline bool is_finite(cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

inline void require_finite(cplx z, const char* who) {
  if (!is_finite(z)) fail(errc::non_finite, std::string(who) + " produced a non-finite value");
}

/// True when z lies on the branch cut ]-inf,0] of the principal logarithm.
inline bool on_log_cut(cplx z) { return z.imag() == 0.0 && z.real() <= 0.0; }

/// Principal log with a hard error on the cut.
inline cplx log_principal(cplx z, const char* who) {
  if (on_log_cut(z)) fail(errc::branch_cut, std::string(who) + ": argument on ]-inf,0]");
  return std::log(z);
}

/// log(1+u)/u, continued by 1 at u=0. Small |u| uses the series to keep full
/// relative accuracy where 1+u rounds away the information.
inline cplx log1p_over(cplx u) {
  if (std::abs(u) < 0.5) {
    cplx sum = 1.0;
    cplx pw = 1.0;
    double sgn = -1.0;
    for (int k = 1; k < 60; ++k) {
      pw *= u;
      cplx term = sgn * pw / double(k + 1);
      sum += term;
      if (std::abs(term) < 1e-18 * std::abs(sum)) break;
      sgn = -sgn;
    }
    return sum;
  }
  return std::log(cplx(1.0) + u) / u;
}

/// (lambda-1)/Log(lambda) evaluated as a function of u = lambda-1; equals
/// 1/log1p_over(u). Checks the principal-branch cut of Log(1+u).
inline cplx ratio_dminus1_over_log(cplx u, const char* who) {
  cplx lam = cplx(1.0) + u;
  if (on_log_cut(lam)) fail(errc::branch_cut, std::string(who) + ": f' on ]-inf,0]");
  return cplx(1.0) / log1p_over(u);
}

/// Log(1+u) without cancellation for small |u|.
inline cplx log1p_c(cplx u) { return u * log1p_over(u); }

/// Integer power by repeated multiplication (exact structure, no pow()).
inline cplx ipow(cplx z, int k) {
  cplx r = 1.0;
  cplx b = z;
  for (int e = k; e > 0; e >>= 1) {
    if (e & 1) r *= b;
    b *= b;
  }
  return r;
}

inline double dist_point_segment(cplx p, cplx a, cplx b) {
  cplx ab = b - a;
  double len2 = std::norm(ab);
  if (len2 == 0.0) return std::abs(p - a);
  double t = std::clamp(((p - a) * std::conj(ab)).real() / len2, 0.0, 1.0);
  return std::abs(p - (a + t * ab));
}

/// Wrap an angle to (-pi, pi].
inline double wrap_angle(double a) {
  a = std::fmod(a, 2.0 * pi);
  if (a <= -pi) a += 2.0 * pi;
  if (a > pi) a -= 2.0 * pi;
  return a;
}

}  // namespace buffdyn
