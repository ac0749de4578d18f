#pragma once

#include <functional>
#include <numeric>
#include <optional>
#include <vector>

#include "buffdyn/germ.hpp"
#include "buffdyn/path.hpp"

namespace buffdyn {

/// Angle of an external ray, in turns, as an exact rational.
struct RayAngle {
  long long num = 0;
  long long den = 1;

  RayAngle() = default;
  RayAngle(long long n, long long d) : num(n), den(d) {
    if (den <= 0) fail(errc::bad_argument, "angle denominator must be positive");
    num %= den;
    if (num < 0) num += den;
    long long g = std::gcd(num == 0 ? den : num, den);
    num /= g;
    den /= g;
  }

  double turns() const { return double(num) / double(den); }

  RayAngle times(long long d) const { return RayAngle(num * d % den, den); }

  bool operator==(const RayAngle& o) const { return num == o.num && den == o.den; }
};

struct RayTail {
  RayAngle angle;
  int degree = 2;
  int period = 1;  // q: period of the angle under multiplication by degree
  double dt = 1.0 / 32;
  std::vector<double> t;  // descending from 0
  std::vector<cplx> z;
  std::optional<cplx> landing;
  double potential_floor = 1.0;
  enum class stop { reached_t_min, landed, newton_failed } status = stop::reached_t_min;
};

namespace detail {

inline int polynomial_degree_checked(const AnalyticMap& P) {
  if (P.is_iterate()) fail(errc::bad_argument, "rays need a plain polynomial");
  int d = P.base_degree();
  if (d < 2) fail(errc::bad_argument, "rays need degree >= 2");
  if (std::abs(P.coefficients().back() - 1.0) > 1e-12)
    fail(errc::bad_argument, "rays need a monic polynomial");
  return d;
}

/// Newton solve of P^k(z) = w from a seed, derivative by the chain rule.
inline cplx newton_on_iterate(const AnalyticMap& P, int k, cplx w, cplx seed, int max_iter) {
  const std::vector<cplx> d = poly_derivative(P.coefficients());
  cplx z = seed;
  for (int it = 0; it < max_iter; ++it) {
    cplx val = z;
    cplx der = 1.0;
    for (int j = 0; j < k; ++j) {
      der *= horner(d, val);
      val = horner(P.coefficients(), val);
      if (!is_finite(val)) fail(errc::newton_divergence, "iterate overflowed in Newton");
    }
    if (der == cplx(0.0)) fail(errc::newton_divergence, "critical point in Newton");
    cplx step = (val - w) / der;
    if (std::abs(step) > 1.0) step /= std::abs(step);  // damp wild steps
    z -= step;
    if (!is_finite(z)) fail(errc::newton_divergence, "Newton left the plane");
    if (std::abs(step) <= 1e-13 * std::max(1.0, std::abs(z))) return z;
  }
  fail(errc::newton_divergence, "Newton on the iterate did not converge");
}

}  // namespace detail

/// Green's potential G(z) = lim log|P^n(z)|/d^n for a monic polynomial,
/// computed by escaping far enough that the tail is below double noise.
inline double green_potential(const AnalyticMap& P, cplx z) {
  int d = detail::polynomial_degree_checked(P);
  cplx w = z;
  double scale = 1.0;
  for (int k = 0; k < 512; ++k) {
    double a = std::abs(w);
    if (a > 1e60) return std::log(a) * scale;
    w = detail::horner(P.coefficients(), w);
    require_finite(w, "green_potential");
    scale /= d;
  }
  fail(errc::non_escaping, "point did not escape within 512 iterations");
}

/// Trace the external ray of angle theta down to parameter t_min, sampling at
/// the uniform grid t = 0, -dt, -2dt, ... with s = (d^q)^t the Green
/// potential. The first unit of t is bootstrapped against far-field targets;
/// afterwards each sample pulls back the sample one unit up through Newton on
/// P^q, which keeps the invariance P^q(z(t)) = z(t+1) exact to Newton
/// tolerance.
inline RayTail trace_ray(const AnalyticMap& P, const RayAngle& theta, int q, double t_min,
                         double dt = 1.0 / 32) {
  int d = detail::polynomial_degree_checked(P);
  if (!(t_min < 0.0)) fail(errc::bad_argument, "t_min must be negative");
  if (!(dt > 0.0 && dt <= 1.0 / 16 + 1e-15)) fail(errc::bad_argument, "need 0 < dt <= 1/16");
  double units = 1.0 / dt;
  int m_unit = int(std::lround(units));
  if (std::abs(units - m_unit) > 1e-9) fail(errc::bad_argument, "1/dt must be an integer");
  if (q < 1) fail(errc::bad_argument, "period q must be >= 1");
  {
    RayAngle a = theta;
    for (int j = 0; j < q; ++j) a = a.times(d);
    if (!(a == theta)) fail(errc::bad_argument, "theta does not have period q under x d");
  }

  const double log_dq = q * std::log(double(d));
  const double G_far = 24.0;

  // Far-field target for potential s at iteration depth k: the Boettcher
  // coordinate is within ~exp(-G_far) of the point itself out there.
  auto far_target = [&](double s, int& k_out) {
    int k = 0;
    double sk = s;
    while (sk < G_far) {
      sk *= d;
      ++k;
    }
    RayAngle a = theta;
    for (int j = 0; j < k; ++j) a = a.times(d);
    k_out = k;
    double ang = 2.0 * pi * a.turns();
    return std::exp(sk) * cplx{std::cos(ang), std::sin(ang)};
  };

  RayTail ray;
  ray.angle = theta;
  ray.degree = d;
  ray.period = q;
  ray.dt = dt;

  // First sample, t = 0 (s = 1): walk the target inward one preimage at a
  // time, choosing the branch whose argument tracks the exact ray angle.
  {
    int k = 0;
    cplx target = far_target(1.0, k);
    cplx cur = target;
    std::vector<RayAngle> levels(size_t(k) + 1);
    levels[0] = theta;
    for (int j = 1; j <= k; ++j) levels[j] = levels[j - 1].times(d);
    for (int j = k; j-- > 0;) {
      double want = 2.0 * pi * levels[j].turns();
      cplx best{};
      double best_err = 1e18;
      double mag = std::pow(std::abs(cur), 1.0 / d);
      double base_arg = std::arg(cur) / d;
      for (int m = 0; m < d; ++m) {
        cplx seed = mag * std::polar(1.0, base_arg + 2.0 * pi * m / d);
        try {
          cplx root = detail::newton_on_iterate(P, 1, cur, seed, 60);
          double err = std::abs(wrap_angle(std::arg(root) - want));
          if (err < best_err) {
            best_err = err;
            best = root;
          }
        } catch (const error&) {
        }
      }
      if (best_err > 1.5) fail(errc::newton_divergence, "lost the ray branch near infinity");
      cur = best;
    }
    ray.t.push_back(0.0);
    ray.z.push_back(cur);
  }

  const long long n_samples = llround(std::floor(-t_min / dt)) + 1;
  int landing_run = 0;
  double prev_step = std::numeric_limits<double>::infinity();

  // Solve for the point at parameter t against its own far-field target.
  auto far_solve = [&](double t, cplx seed) {
    double s = std::exp(t * log_dq);
    if (!(s > 0.0)) fail(errc::newton_divergence, "potential underflowed");
    int k = 0;
    cplx target = far_target(s, k);
    return detail::newton_on_iterate(P, k, target, seed, 80);
  };
  // On a failed step, walk from t_prev to t in halves (down to dt/16),
  // re-seeding each half-step from its far-field equation.
  std::function<cplx(double, double, cplx, int)> halved =
      [&](double t_prev, double t, cplx seed, int depth) -> cplx {
    try {
      return far_solve(t, seed);
    } catch (const error&) {
      if (depth >= 4) throw;
    }
    double mid = 0.5 * (t_prev + t);
    cplx half = halved(t_prev, mid, seed, depth + 1);
    return halved(mid, t, half, depth + 1);
  };

  for (long long j = 1; j < n_samples; ++j) {
    double tj = -double(j) * dt;
    double s = std::exp(tj * log_dq);
    cplx sample;
    try {
      if (j < m_unit) {
        int k = 0;
        cplx target = far_target(s, k);
        sample = detail::newton_on_iterate(P, k, target, ray.z.back(), 80);
      } else {
        cplx target = ray.z[size_t(j) - m_unit];
        try {
          sample = detail::newton_on_iterate(P, q, target, ray.z.back(), 200);
        } catch (const error&) {
          sample = halved(tj + dt, tj, ray.z.back(), 0);
        }
      }
    } catch (const error&) {
      ray.status = RayTail::stop::newton_failed;
      break;
    }
    ray.t.push_back(tj);
    ray.z.push_back(sample);

    double step = std::abs(ray.z[ray.z.size() - 1] - ray.z[ray.z.size() - 2]);
    if (step < 3e-11 && step <= prev_step * (1.0 + 1e-12)) {
      if (++landing_run >= 8) {
        size_t n = ray.z.size();
        cplx za = ray.z[n - 3], zb = ray.z[n - 2], zc = ray.z[n - 1];
        cplx den = zc - 2.0 * zb + za;
        // Aitken extrapolation only while the second difference is far above
        // the rounding floor; otherwise the last sample is already converged.
        ray.landing = std::abs(den) > 1e-9 * std::abs(zc) ? (zc * za - zb * zb) / den : zc;
        ray.status = RayTail::stop::landed;
        break;
      }
    } else {
      landing_run = 0;
    }
    prev_step = step;
  }
  ray.potential_floor = std::exp(ray.t.back() * log_dq);
  if (ray.z.empty()) fail(errc::newton_divergence, "ray could not be started");
  return ray;
}

/// The candidate closest to the deep end of the ray, accepted only when the
/// last 8 samples sit within tol of it with non-increasing distances.
inline std::optional<cplx> landing_point(const RayTail& ray, const std::vector<cplx>& candidates,
                                         double tol) {
  if (ray.z.size() < 8 || candidates.empty()) return std::nullopt;
  cplx deep = 0.0;
  for (size_t k = ray.z.size() - 8; k < ray.z.size(); ++k) deep += ray.z[k];
  deep /= 8.0;
  cplx best = candidates.front();
  for (cplx c : candidates)
    if (std::abs(c - deep) < std::abs(best - deep)) best = c;
  double prev = std::numeric_limits<double>::infinity();
  for (size_t k = ray.z.size() - 8; k < ray.z.size(); ++k) {
    double dist = std::abs(ray.z[k] - best);
    if (dist > tol || dist > prev * (1.0 + 1e-12)) return std::nullopt;
    prev = dist;
  }
  return best;
}

namespace detail {

/// kd-tree nearest-neighbor structure over a point cloud (ray samples pile
/// up geometrically near the landing point, which degrades uniform grids).
class nearest_cloud {
 public:
  explicit nearest_cloud(std::vector<cplx> pts) : pts_(std::move(pts)) {
    build(0, pts_.size(), 0);
  }

  double distance(cplx p) const {
    double best = std::numeric_limits<double>::infinity();
    query(p, 0, pts_.size(), 0, best);
    return best;
  }

 private:
  void build(size_t lo, size_t hi, int axis) {
    if (hi - lo <= 1) return;
    size_t mid = (lo + hi) / 2;
    std::nth_element(pts_.begin() + lo, pts_.begin() + mid, pts_.begin() + hi,
                     [axis](cplx a, cplx b) {
                       return axis ? a.imag() < b.imag() : a.real() < b.real();
                     });
    build(lo, mid, 1 - axis);
    build(mid + 1, hi, 1 - axis);
  }

  void query(cplx p, size_t lo, size_t hi, int axis, double& best) const {
    if (lo >= hi) return;
    size_t mid = (lo + hi) / 2;
    best = std::min(best, std::abs(p - pts_[mid]));
    double gap = axis ? p.imag() - pts_[mid].imag() : p.real() - pts_[mid].real();
    if (gap < 0.0) {
      query(p, lo, mid, 1 - axis, best);
      if (-gap < best) query(p, mid + 1, hi, 1 - axis, best);
    } else {
      query(p, mid + 1, hi, 1 - axis, best);
      if (gap < best) query(p, lo, mid, 1 - axis, best);
    }
  }

  std::vector<cplx> pts_;
};

inline std::vector<cplx> cloud_of(const RayTail& r) {
  std::vector<cplx> pts = r.z;
  if (r.landing) pts.push_back(*r.landing);
  if (pts.empty()) fail(errc::empty_ray, "ray has no samples");
  return pts;
}

}  // namespace detail

/// Hausdorff distance between the sample clouds (landing points included).
inline double hausdorff_distance(const RayTail& A, const RayTail& B) {
  std::vector<cplx> a = detail::cloud_of(A), b = detail::cloud_of(B);
  detail::nearest_cloud na(a), nb(b);
  double d = 0.0;
  for (cplx p : a) d = std::max(d, nb.distance(p));
  for (cplx p : b) d = std::max(d, na.distance(p));
  return d;
}

/// Max over the shared t-grid of |z_A(t) - z_B(t)|; landing points compared
/// when both rays land.
inline double uniform_parameter_distance(const RayTail& A, const RayTail& B) {
  if (std::abs(A.dt - B.dt) > 1e-12) fail(errc::grid_mismatch, "rays sampled at different dt");
  if (A.z.empty() || B.z.empty()) fail(errc::empty_ray, "ray has no samples");
  size_t n = std::min(A.z.size(), B.z.size());
  double d = 0.0;
  for (size_t k = 0; k < n; ++k) d = std::max(d, std::abs(A.z[k] - B.z[k]));
  if (A.landing && B.landing) d = std::max(d, std::abs(*A.landing - *B.landing));
  return d;
}

/// True when the arc of the ray crossing the disk D(center, r) separates the
/// given fixed points inside the disk: the components of the disk minus the
/// arc are told apart by crossing parity against the arc closed up along the
/// boundary circle.
inline bool detect_gate_crossing(const RayTail& ray, const std::vector<cplx>& fixed_points,
                                 cplx center, double r) {
  if (ray.z.size() < 2) fail(errc::empty_ray, "ray has no samples");
  auto inside = [&](cplx z) { return std::abs(z - center) < r; };
  if (ray.landing && inside(*ray.landing))
    fail(errc::ray_lands_inside, "ray lands inside the disk; gate test inapplicable");

  size_t e0 = 0;
  while (e0 < ray.z.size() && !inside(ray.z[e0])) ++e0;
  if (e0 == 0 || e0 == ray.z.size())
    fail(errc::bad_argument, "ray does not enter the disk from outside");
  size_t x0 = e0;
  while (x0 < ray.z.size() && inside(ray.z[x0])) ++x0;
  if (x0 == ray.z.size())
    fail(errc::ray_lands_inside, "ray ends inside the disk; gate test inapplicable");

  auto circle_cross = [&](cplx a, cplx b) {
    // first intersection of segment a->b with |z - center| = r
    cplx u = b - a;
    double A = std::norm(u);
    double B = 2.0 * ((a - center) * std::conj(u)).real();
    double C = std::norm(a - center) - r * r;
    double disc = B * B - 4 * A * C;
    disc = std::max(disc, 0.0);
    double s1 = (-B - std::sqrt(disc)) / (2 * A);
    double s2 = (-B + std::sqrt(disc)) / (2 * A);
    double s = (s1 >= 0.0 && s1 <= 1.0) ? s1 : s2;
    s = std::clamp(s, 0.0, 1.0);
    return a + s * u;
  };
  cplx entry = circle_cross(ray.z[e0 - 1], ray.z[e0]);
  cplx exitp = circle_cross(ray.z[x0 - 1], ray.z[x0]);

  std::vector<cplx> poly;
  poly.push_back(entry);
  for (size_t k = e0; k < x0; ++k) poly.push_back(ray.z[k]);
  poly.push_back(exitp);
  // close along the boundary circle, counterclockwise from exit to entry
  double a_exit = std::arg(exitp - center);
  double a_entry = std::arg(entry - center);
  double sweep = a_entry - a_exit;
  while (sweep <= 0.0) sweep += 2.0 * pi;
  int arc_steps = std::max(64, int(sweep / 0.01));
  for (int k = 1; k <= arc_steps; ++k) {
    double th = a_exit + sweep * k / arc_steps;
    poly.push_back(center + r * cplx{std::cos(th), std::sin(th)});
  }

  auto point_in_poly = [&](cplx p) {
    bool in = false;
    for (size_t k = 0; k + 1 < poly.size(); ++k) {
      cplx a = poly[k], b = poly[k + 1];
      if ((a.imag() > p.imag()) != (b.imag() > p.imag())) {
        double xint =
            a.real() + (p.imag() - a.imag()) * (b.real() - a.real()) / (b.imag() - a.imag());
        if (p.real() < xint) in = !in;
      }
    }
    // closing edge
    cplx a = poly.back(), b = poly.front();
    if ((a.imag() > p.imag()) != (b.imag() > p.imag())) {
      double xint =
          a.real() + (p.imag() - a.imag()) * (b.real() - a.real()) / (b.imag() - a.imag());
      if (p.real() < xint) in = !in;
    }
    return in;
  };

  int inside_cnt = 0, total = 0;
  for (cplx fp : fixed_points) {
    double dfc = std::abs(fp - center);
    if (dfc > r * (1.0 + 1e-9)) continue;  // outside the closed disk
    cplx probe = fp;
    if (dfc > r * (1.0 - 1e-6) && dfc > 0.0)
      probe = center + (fp - center) * (r * (1.0 - 1e-6) / dfc);  // nudge boundary points inward
    ++total;
    if (point_in_poly(probe)) ++inside_cnt;
  }
  return total >= 2 && inside_cnt > 0 && inside_cnt < total;
}

}  // namespace buffdyn
