#pragma once

#include <array>
#include <limits>
#include <vector>

#include "buffdyn/fixpoint.hpp"
#include "buffdyn/quadrature.hpp"

namespace buffdyn {

/// The Buff form of a map: omega_f = (f'-1)/((f-z) Log f') dz, with its poles
/// (the fixed points in the validity disk) and a guard distance below which
/// direct evaluation is refused.
struct BuffForm {
  AnalyticMap map;
  std::vector<FixedPointRecord> fixed_points;
  double pole_guard;
};

inline BuffForm make_buff_form(const AnalyticMap& map, double pole_guard = -1.0) {
  BuffForm form{map, find_fixed_points(map, map.validity_radius()),
                pole_guard > 0.0 ? pole_guard : 1e-4 * map.validity_radius()};
  return form;
}

namespace detail {

inline void check_positivity(cplx fprime, const char* who) {
  if (on_log_cut(fprime)) fail(errc::branch_cut, std::string(who) + ": f' on ]-inf,0]");
  if (fprime.real() <= 0.0)
    fail(errc::positivity_violated, std::string(who) + ": Re f' <= 0");
}

/// omega without the pole-distance guard (used once a whole segment has been
/// cleared against the guard).
inline cplx omega_unguarded(const BuffForm& form, cplx z) {
  cplx u = derivative_minus_one(form.map, z);
  check_positivity(cplx(1.0) + u, "omega");
  cplx val = ratio_dminus1_over_log(u, "omega") / displacement(form.map, z);
  require_finite(val, "omega");
  return val;
}

inline const FixedPointRecord* nearest_fixed_point(const BuffForm& form, cplx z,
                                                   double* dist_out = nullptr) {
  const FixedPointRecord* best = nullptr;
  double best_d = std::numeric_limits<double>::infinity();
  for (const auto& r : form.fixed_points) {
    double d = std::abs(z - r.location);
    if (d < best_d) {
      best_d = d;
      best = &r;
    }
  }
  if (dist_out) *dist_out = best_d;
  return best;
}

inline void check_segment_clear(const BuffForm& form, cplx a, cplx b, const char* who) {
  for (const auto& r : form.fixed_points) {
    if (dist_point_segment(r.location, a, b) < form.pole_guard)
      throw error(errc::segment_near_pole,
                  std::string(who) + ": integration segment within pole_guard of a pole",
                  r.location);
  }
}

}  // namespace detail

/// Coefficient of the Buff form at z.
inline cplx omega(const BuffForm& form, cplx z) {
  detail::check_inside(form.map, z);
  double d;
  const FixedPointRecord* p = detail::nearest_fixed_point(form, z, &d);
  if (p && d < form.pole_guard)
    throw error(errc::pole_proximity, "omega: within pole_guard of a fixed point",
                p->location);
  return detail::omega_unguarded(form, z);
}

/// The Buff vector field chi_f = 1/omega_f, regular (and zero) at fixed points.
inline cplx chi(const BuffForm& form, cplx z) {
  detail::check_inside(form.map, z);
  cplx u = derivative_minus_one(form.map, z);
  detail::check_positivity(cplx(1.0) + u, "chi");
  return displacement(form.map, z) * log1p_over(u);
}

/// res(omega_f, p): 1/Log lambda at simple points, resit at multiplier-1 points.
inline cplx residue_closed_form(const FixedPointRecord& record) {
  if (record.multiplicity == 1 && std::abs(record.multiplier - 1.0) > detail::parabolic_eps) {
    if (on_log_cut(record.multiplier))
      fail(errc::branch_cut, "multiplier on ]-inf,0] has no principal Log");
    return 1.0 / std::log(record.multiplier);
  }
  return record.resit;
}

/// (1/2pi i) contour integral of omega on |z-p| = radius (quadrature oracle
/// for the closed form).
inline cplx residue_numeric(const BuffForm& form, cplx p, double radius) {
  if (std::abs(p) + radius > form.map.validity_radius())
    fail(errc::domain_exceeded, "residue contour leaves the validity disk");
  for (const auto& r : form.fixed_points) {
    if (std::abs(r.location - p) < 1e-10) continue;
    if (std::abs(std::abs(r.location - p) - radius) < radius)
      fail(errc::contour_conflict, "another fixed point too close to the contour");
  }
  return quad::circle_residue([&](cplx z) { return detail::omega_unguarded(form, z); }, p,
                              radius, 1e-10);
}

// ---------------------------------------------------------------------------
// u_{f,t}: deviation of the partial lift of [z, f(z)] from t-translation.
//
// The generic path integrates omega over [z, z_t] and subtracts t. Near a
// parabolic point that difference sits far below the double-precision noise
// of the quadrature (u_f vanishes to order 2q), so for polynomial maps with
// small displacement-derivative we instead expand the integrand
//   g(t) = Delta(z) omega(z + t Delta(z)) - 1
// as a power series in t whose coefficients are exact polynomial data; the
// "-1" then cancels symbolically instead of in floating point.
// ---------------------------------------------------------------------------

namespace detail {

inline const std::vector<double>& ratio_series_coeffs() {
  // u/log(1+u) = 1 + sum_{m>=1} r_m u^m, by inverting log(1+u)/u.
  static const std::vector<double> r = [] {
    const int M = 40;
    std::vector<double> L(M + 1), out(M + 1);
    for (int k = 0; k <= M; ++k) L[k] = (k % 2 ? -1.0 : 1.0) / double(k + 1);
    out[0] = 1.0;
    for (int m = 1; m <= M; ++m) {
      double s = 0.0;
      for (int j = 1; j <= m; ++j) s += L[j] * out[m - j];
      out[m] = -s;
    }
    return out;
  }();
  return r;
}

struct tpoly {  // truncated power series in t
  static constexpr int K = 32;
  std::array<cplx, K + 1> c{};

  double norm1() const {
    double s = 0.0;
    for (const cplx& x : c) s += std::abs(x);
    return s;
  }
};

inline tpoly tp_mul(const tpoly& a, const tpoly& b) {
  tpoly r;
  for (int i = 0; i <= tpoly::K; ++i) {
    if (a.c[i] == cplx(0.0)) continue;
    for (int j = 0; i + j <= tpoly::K; ++j) r.c[i + j] += a.c[i] * b.c[j];
  }
  return r;
}

inline tpoly tp_add(const tpoly& a, const tpoly& b) {
  tpoly r;
  for (int i = 0; i <= tpoly::K; ++i) r.c[i] = a.c[i] + b.c[i];
  return r;
}

struct u_series {
  bool usable = false;
  tpoly g;  // integrand minus 1

  cplx integral(double t) const {  // int_0^t g
    cplx sum = 0.0;
    double tp = 1.0;
    for (int k = 0; k <= tpoly::K; ++k) {
      tp *= t;  // t^{k+1}
      sum += g.c[k] * (tp / double(k + 1));
    }
    return sum;
  }
};

inline u_series build_u_series(const BuffForm& form, cplx z) {
  u_series s;
  if (form.map.is_iterate()) return s;
  std::vector<cplx> dcoef = base_displacement(form.map);
  if (int(dcoef.size()) > tpoly::K) return s;       // degree beyond the truncation
  std::vector<cplx> taylor = poly_shift(dcoef, z);  // Delta^{(k)}(z)/k!
  cplx d0 = taylor[0];                              // Delta(z)
  if (d0 == cplx(0.0)) return s;

  tpoly P;  // Delta(z_t)/Delta(z) - 1
  tpoly B;  // Delta'(z_t)
  cplx d0k = 1.0;
  for (size_t k = 1; k < taylor.size() && int(k) <= tpoly::K; ++k) {
    P.c[k] = taylor[k] * d0k;  // tau_k d0^{k-1}
    d0k *= d0;
  }
  d0k = 1.0;
  for (size_t k = 0; k + 1 < taylor.size() && int(k) <= tpoly::K; ++k) {
    B.c[k] = double(k + 1) * taylor[k + 1] * d0k;
    d0k *= d0;
  }
  if (P.norm1() > 0.125 || B.norm1() > 0.125) return s;

  // inv = 1/(1+P) - 1 = sum (-P)^j
  tpoly inv, pw;
  pw.c[0] = 1.0;
  for (int j = 1; j <= 40; ++j) {
    tpoly negP;
    for (int i = 0; i <= tpoly::K; ++i) negP.c[i] = -P.c[i];
    pw = tp_mul(pw, negP);
    inv = tp_add(inv, pw);
    if (pw.norm1() < 1e-30) break;
  }
  // rat = ratio(B) - 1 = sum r_m B^m
  const auto& rm = ratio_series_coeffs();
  tpoly rat, bpw;
  bpw.c[0] = 1.0;
  for (size_t m = 1; m < rm.size(); ++m) {
    bpw = tp_mul(bpw, B);
    for (int i = 0; i <= tpoly::K; ++i) rat.c[i] += rm[m] * bpw.c[i];
    if (bpw.norm1() < 1e-30) break;
  }
  s.g = tp_add(tp_add(rat, inv), tp_mul(rat, inv));
  s.usable = true;
  return s;
}

}  // namespace detail

/// u_{f,t}(z) = -t + int_{[z, z_t]} omega, with z_t = (1-t) z + t f(z).
/// Vanishes identically in t at fixed points.
inline cplx u_f_t(const BuffForm& form, cplx z, double t) {
  if (!(t >= 0.0 && t <= 1.0)) fail(errc::bad_argument, "u_f_t needs t in [0,1]");
  detail::check_inside(form.map, z);
  for (const auto& r : form.fixed_points)
    if (std::abs(z - r.location) < 1e-13 * std::max(1.0, std::abs(r.location))) return cplx(0.0);
  if (t == 0.0) return cplx(0.0);

  cplx d = displacement(form.map, z);
  cplx zt = z + t * d;
  detail::check_segment_clear(form, z, zt, "u_f_t");

  detail::u_series series = detail::build_u_series(form, z);
  if (series.usable) return series.integral(t);

  cplx integral = quad::integrate_segment(
      [&](cplx s) { return detail::omega_unguarded(form, s); }, z, zt);
  return integral - t;
}

/// u_f(z) = -1 + int_{[z, f(z)]} omega; zero of order 2q at a parabolic point
/// of multiplicity q+1.
inline cplx u_f(const BuffForm& form, cplx z) { return u_f_t(form, z, 1.0); }

}  // namespace buffdyn
