#pragma once

#include <utility>
#include <vector>

#include "buffdyn/numeric.hpp"

namespace buffdyn {

/// A holomorphic map given as a polynomial or as the q-th iterate of one,
/// together with a disk of validity. Immutable after construction.
class AnalyticMap {
 public:
  static AnalyticMap polynomial(std::vector<cplx> coefficients, double validity_radius) {
    return AnalyticMap(std::move(coefficients), 1, validity_radius);
  }

  /// f = base^{power}; iterating an iterate multiplies the powers.
  static AnalyticMap iterate(const AnalyticMap& base, int power) {
    if (power < 1) fail(errc::bad_argument, "iterate power must be >= 1");
    return AnalyticMap(base.coeffs_, base.power_ * power, base.radius_);
  }

  const std::vector<cplx>& coefficients() const { return coeffs_; }
  int power() const { return power_; }
  bool is_iterate() const { return power_ > 1; }
  double validity_radius() const { return radius_; }
  int base_degree() const { return int(coeffs_.size()) - 1; }

 private:
  AnalyticMap(std::vector<cplx> coeffs, int power, double radius)
      : coeffs_(std::move(coeffs)), power_(power), radius_(radius) {
    while (coeffs_.size() > 1 && coeffs_.back() == cplx(0.0)) coeffs_.pop_back();
    if (coeffs_.empty()) fail(errc::bad_argument, "empty coefficient list");
    for (cplx c : coeffs_)
      if (!is_finite(c)) fail(errc::non_finite, "map coefficient not finite");
    if (!(radius_ > 0.0)) fail(errc::bad_argument, "validity radius must be positive");
  }

  std::vector<cplx> coeffs_;  // base polynomial, ascending powers
  int power_;                 // f = base^{power}
  double radius_;
};

namespace detail {

inline cplx horner(const std::vector<cplx>& c, cplx z) {
  cplx r = c.back();
  for (size_t k = c.size() - 1; k-- > 0;) r = r * z + c[k];
  return r;
}

inline std::vector<cplx> poly_derivative(const std::vector<cplx>& c) {
  if (c.size() <= 1) return {cplx(0.0)};
  std::vector<cplx> d(c.size() - 1);
  for (size_t k = 1; k < c.size(); ++k) d[k - 1] = double(k) * c[k];
  return d;
}

/// base(z) - z, coefficient-exact.
inline std::vector<cplx> base_displacement(const AnalyticMap& m) {
  std::vector<cplx> d = m.coefficients();
  if (d.size() < 2) d.resize(2, cplx(0.0));
  d[1] -= 1.0;
  return d;
}

inline void check_inside(const AnalyticMap& m, cplx z) {
  if (!is_finite(z)) fail(errc::non_finite, "evaluation point not finite");
  if (std::abs(z) > m.validity_radius() * (1.0 + 1e-12))
    fail(errc::domain_exceeded, "point outside the validity disk");
}

}  // namespace detail

inline cplx evaluate(const AnalyticMap& map, cplx z) {
  detail::check_inside(map, z);
  cplx w = z;
  for (int j = 0; j < map.power(); ++j) {
    w = detail::horner(map.coefficients(), w);
    require_finite(w, "evaluate");
  }
  return w;
}

/// Exact derivative: coefficient rule for polynomials, chain rule along the
/// orbit for iterates.
inline cplx derivative(const AnalyticMap& map, cplx z) {
  detail::check_inside(map, z);
  const std::vector<cplx> d = detail::poly_derivative(map.coefficients());
  cplx w = z;
  cplx prod = 1.0;
  for (int j = 0; j < map.power(); ++j) {
    prod *= detail::horner(d, w);
    w = detail::horner(map.coefficients(), w);
    require_finite(w, "derivative");
  }
  require_finite(prod, "derivative");
  return prod;
}

inline cplx second_derivative(const AnalyticMap& map, cplx z) {
  detail::check_inside(map, z);
  const std::vector<cplx> d1 = detail::poly_derivative(map.coefficients());
  const std::vector<cplx> d2 = detail::poly_derivative(d1);
  // (F o g)'' = F''(g) g'^2 + F'(g) g'', built up along the orbit.
  cplx w = z;
  cplx first = 1.0, second = 0.0;
  for (int j = 0; j < map.power(); ++j) {
    cplx gp = detail::horner(d1, w);
    cplx gpp = detail::horner(d2, w);
    second = second * gp * gp + first * gpp;
    first *= gp;
    w = detail::horner(map.coefficients(), w);
    require_finite(w, "second_derivative");
  }
  return second;
}

/// f(z) - z via the telescoped sum of base displacements along the orbit;
/// avoids the catastrophic cancellation of evaluate(map,z) - z for iterates
/// of near-rotations.
inline cplx displacement(const AnalyticMap& map, cplx z) {
  detail::check_inside(map, z);
  const std::vector<cplx> d = detail::base_displacement(map);
  cplx w = z;
  cplx sum = 0.0;
  for (int j = 0; j < map.power(); ++j) {
    sum += detail::horner(d, w);
    w = detail::horner(map.coefficients(), w);
    require_finite(w, "displacement");
  }
  return sum;
}

/// f'(z) - 1 accumulated as r <- r + e + r e over the orbit factors
/// e_j = base'(z_j) - 1, so near-identity products keep full accuracy.
inline cplx derivative_minus_one(const AnalyticMap& map, cplx z) {
  detail::check_inside(map, z);
  std::vector<cplx> dm1 = detail::poly_derivative(map.coefficients());
  dm1[0] -= 1.0;
  cplx w = z;
  cplx r = 0.0;
  for (int j = 0; j < map.power(); ++j) {
    cplx e = detail::horner(dm1, w);
    r = r + e + r * e;
    w = detail::horner(map.coefficients(), w);
    require_finite(w, "derivative_minus_one");
  }
  return r;
}

inline cplx local_inverse(const AnalyticMap& map, cplx w, cplx seed);

/// [z, f(z), ..., f^k(z)]; k < 0 walks the local inverse branch seeded at the
/// current point.
inline std::vector<cplx> iterate_orbit(const AnalyticMap& map, cplx z, int k) {
  std::vector<cplx> orbit{z};
  cplx cur = z;
  for (int j = 0; j < std::abs(k); ++j) {
    cur = k > 0 ? evaluate(map, cur) : local_inverse(map, cur, cur);
    if (std::abs(cur) > map.validity_radius() * (1.0 + 1e-12))
      fail(errc::orbit_escaped, "orbit left the validity disk");
    orbit.push_back(cur);
  }
  return orbit;
}

/// Newton inversion of evaluate(map, .) = w, branch picked by the seed.
inline cplx local_inverse(const AnalyticMap& map, cplx w, cplx seed) {
  constexpr double tol = 1e-12;
  constexpr int max_iter = 64;
  cplx z = seed;
  for (int it = 0; it < max_iter; ++it) {
    cplx fp = derivative(map, z);
    if (std::abs(fp) < 1e-8)
      fail(errc::critical_point_nearby, "|f'| below 1e-8 during inversion");
    cplx step = (evaluate(map, z) - w) / fp;
    z -= step;
    require_finite(z, "local_inverse");
    if (std::abs(step) <= tol * std::max(1.0, std::abs(z))) {
      if (std::abs(evaluate(map, z) - w) > 1e-9 * std::max(1.0, std::abs(w)))
        fail(errc::no_convergence, "Newton stalled away from the target");
      return z;
    }
  }
  fail(errc::no_convergence, "local inverse did not converge in 64 iterations");
}

namespace detail {

/// Taylor coefficients of a polynomial about `center` by repeated synthetic
/// division by (z - center).
inline std::vector<cplx> poly_shift(std::vector<cplx> a, cplx center) {
  const size_t n = a.size();
  std::vector<cplx> out(n, cplx(0.0));
  for (size_t j = 0; j < n && !a.empty(); ++j) {
    cplx carry = a.back();
    std::vector<cplx> q(a.size() - 1);
    for (size_t k = a.size() - 1; k-- > 0;) {
      q[k] = carry;
      carry = a[k] + center * carry;
    }
    out[j] = carry;
    a = std::move(q);
  }
  return out;
}

}  // namespace detail

/// First n+1 Taylor coefficients of the map at `center`. Polynomials shift
/// exactly; iterates use Cauchy integrals on a small circle with node
/// doubling until two estimates agree to 1e-10.
inline std::vector<cplx> taylor_coefficients(const AnalyticMap& map, cplx center, int n) {
  detail::check_inside(map, center);
  if (n < 0) fail(errc::bad_argument, "need n >= 0 coefficients");
  if (!map.is_iterate()) {
    std::vector<cplx> shifted = detail::poly_shift(map.coefficients(), center);
    shifted.resize(size_t(n) + 1, cplx(0.0));
    return shifted;
  }
  const double r = std::min(map.validity_radius() / 4.0, 0.1);
  std::vector<cplx> prev, cur;
  for (int nodes = 64; nodes <= (1 << 16); nodes *= 2) {
    cur.assign(size_t(n) + 1, cplx(0.0));
    for (int j = 0; j < nodes; ++j) {
      double th = 2.0 * pi * j / nodes;
      cplx e{std::cos(th), std::sin(th)};
      cplx fz = evaluate(map, center + r * e);
      cplx rot = 1.0;  // e^{-ik theta}
      for (int k = 0; k <= n; ++k) {
        cur[k] += fz * rot;
        rot *= std::conj(e);
      }
    }
    double rk = 1.0;
    for (int k = 0; k <= n; ++k) {
      cur[k] /= double(nodes) * rk;
      rk *= r;
    }
    if (!prev.empty()) {
      double diff = 0.0;
      for (int k = 0; k <= n; ++k) diff = std::max(diff, std::abs(cur[k] - prev[k]));
      if (diff < 1e-10) return cur;
    }
    prev = cur;
  }
  fail(errc::quadrature_failure, "Cauchy coefficients did not stabilize to 1e-10");
}

}  // namespace buffdyn
