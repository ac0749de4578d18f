#pragma once

#include <functional>
#include <vector>

#include "buffdyn/buffform.hpp"
#include "buffdyn/path.hpp"

namespace buffdyn {

/// A holomorphic vector field chi(z) d/dz with its dual form, singular set and
/// disk of definition; wraps Buff fields and explicit model fields alike.
struct VectorField {
  std::function<cplx(cplx)> chi;
  std::function<cplx(cplx)> omega;
  std::vector<cplx> singularities;
  double radius = 1.0;
};

inline VectorField field_of(const BuffForm& form) {
  VectorField f;
  f.chi = [form](cplx z) { return chi(form, z); };
  f.omega = [form](cplx z) { return detail::omega_unguarded(form, z); };
  for (const auto& r : form.fixed_points) f.singularities.push_back(r.location);
  f.radius = form.map.validity_radius();
  return f;
}

/// chi_0 = w^m / (1 + c w^{m-1}), the local normal form of a multiplicity-m
/// singularity.
inline VectorField normal_form_field(int m, cplx c, double radius) {
  if (m < 2) fail(errc::bad_argument, "normal form needs m >= 2");
  VectorField f;
  f.chi = [m, c](cplx w) { return ipow(w, m) / (cplx(1.0) + c * ipow(w, m - 1)); };
  f.omega = [m, c](cplx w) { return (cplx(1.0) + c * ipow(w, m - 1)) / ipow(w, m); };
  f.singularities = {cplx(0.0)};
  f.radius = radius;
  return f;
}

struct TrajectorySpec {
  cplx direction{1.0, 0.0};  // unimodular rotation alpha
  double t_max = 10.0;
  double step = 1e-3;  // initial step size
  double stop_radius = 0.0;
  double max_step = 0.0;  // 0: unlimited; otherwise a vertex-density cap

  TrajectorySpec(cplx dir, double tmax, double step_ = 1e-3, double stop = 0.0,
                 double max_step_ = 0.0)
      : direction(dir), t_max(tmax), step(step_), stop_radius(stop), max_step(max_step_) {
    if (std::abs(std::abs(direction) - 1.0) > 1e-12)
      fail(errc::bad_argument, "trajectory direction must be unimodular");
    if (!(t_max > 0.0) || !(step > 0.0)) fail(errc::bad_argument, "need positive t_max, step");
  }
};

enum class trajectory_end { reached_t_max, hit_boundary, terminated_at_singularity };

struct TrajectoryResult {
  std::vector<double> times;
  PathPolyline path;
  trajectory_end status = trajectory_end::reached_t_max;
  double t_end = 0.0;
};

namespace detail {

// Dormand-Prince 5(4) tableau.
struct dp45_step {
  cplx z5, z4;
};

template <class F>
dp45_step dp45(F&& f, cplx z, double h) {
  cplx k1 = f(z);
  cplx k2 = f(z + h * (1.0 / 5) * k1);
  cplx k3 = f(z + h * ((3.0 / 40) * k1 + (9.0 / 40) * k2));
  cplx k4 = f(z + h * ((44.0 / 45) * k1 - (56.0 / 15) * k2 + (32.0 / 9) * k3));
  cplx k5 = f(z + h * ((19372.0 / 6561) * k1 - (25360.0 / 2187) * k2 + (64448.0 / 6561) * k3 -
                       (212.0 / 729) * k4));
  cplx k6 = f(z + h * ((9017.0 / 3168) * k1 - (355.0 / 33) * k2 + (46732.0 / 5247) * k3 +
                       (49.0 / 176) * k4 - (5103.0 / 18656) * k5));
  cplx z5 = z + h * ((35.0 / 384) * k1 + (500.0 / 1113) * k3 + (125.0 / 192) * k4 -
                     (2187.0 / 6784) * k5 + (11.0 / 84) * k6);
  cplx k7 = f(z5);
  cplx z4 = z + h * ((5179.0 / 57600) * k1 + (7571.0 / 16695) * k3 + (393.0 / 640) * k4 -
                     (92097.0 / 339200) * k5 + (187.0 / 2100) * k6 + (1.0 / 40) * k7);
  return {z5, z4};
}

}  // namespace detail

/// Adaptive RK45 solution of dz/dt = direction * chi(z), vertices at accepted
/// steps; stops at t_max, at the boundary, near a singularity, or when the
/// step underflows (reported as termination at a singularity).
inline TrajectoryResult trajectory(const VectorField& field, cplx z0, const TrajectorySpec& spec) {
  constexpr double rtol = 1e-9, atol = 1e-12;
  for (cplx s : field.singularities)
    if (std::abs(z0 - s) < 1e-14) fail(errc::bad_argument, "trajectory started at a singularity");
  if (std::abs(z0) > field.radius) fail(errc::domain_exceeded, "start outside the disk");

  auto rhs = [&](cplx z) { return spec.direction * field.chi(z); };
  TrajectoryResult out;
  out.times.push_back(0.0);
  out.path.vertices.push_back(z0);

  double t = 0.0, h = std::min(spec.step, spec.t_max);
  cplx z = z0;
  auto near_singularity = [&](cplx w) {
    if (spec.stop_radius <= 0.0) return false;
    for (cplx s : field.singularities)
      if (std::abs(w - s) < spec.stop_radius) return true;
    return false;
  };

  while (t < spec.t_max) {
    h = std::min(h, spec.t_max - t);
    if (spec.max_step > 0.0) h = std::min(h, spec.max_step);
    if (h < 1e-14 * std::max(1.0, std::abs(t))) {
      out.status = trajectory_end::terminated_at_singularity;
      out.t_end = t;
      return out;
    }
    detail::dp45_step st = detail::dp45(rhs, z, h);
    if (!is_finite(st.z5) || std::abs(st.z5) > field.radius) {
      h *= 0.5;  // pulled outside; shrink toward the boundary
      if (h < 1e-14 * std::max(1.0, std::abs(t))) {
        out.status = trajectory_end::hit_boundary;
        out.t_end = t;
        return out;
      }
      continue;
    }
    double err = std::abs(st.z5 - st.z4);
    double tol = atol + rtol * std::abs(st.z5);
    if (err <= tol) {
      t += h;
      z = st.z5;
      out.times.push_back(t);
      out.path.vertices.push_back(z);
      if (near_singularity(z)) {
        out.status = trajectory_end::terminated_at_singularity;
        out.t_end = t;
        return out;
      }
    }
    double fac = err > 0.0 ? 0.9 * std::pow(tol / err, 0.2) : 5.0;
    h *= std::clamp(fac, 0.2, 5.0);
  }
  out.status = trajectory_end::reached_t_max;
  out.t_end = t;
  return out;
}

/// phi_0(w) = -1/(m-1) w^{-(m-1)} + c log w, the rectifying coordinate of the
/// normal form field.
inline cplx normal_form_phi0(int m, cplx c, cplx w) {
  if (m < 2) fail(errc::bad_argument, "normal form needs m >= 2");
  if (w == cplx(0.0)) fail(errc::bad_argument, "phi0 undefined at 0");
  cplx val = -1.0 / (double(m - 1) * ipow(w, m - 1));
  if (c != cplx(0.0)) val += c * log_principal(w, "normal_form_phi0");
  return val;
}

namespace detail {

/// (1+u) log1p_over(u) - 1 = u/2 - u^2/6 + ..., evaluated without cancellation.
inline cplx one_plus_u_ell_minus_1(cplx u) {
  if (std::abs(u) < 0.5) {
    cplx sum = 0.0, pw = 1.0;
    double sgn = 1.0;
    for (int j = 1; j < 60; ++j) {
      pw *= u;
      cplx term = sgn * pw / double(j * (j + 1));
      sum += term;
      if (std::abs(term) < 1e-18 * std::max(1.0, std::abs(sum))) break;
      sgn = -sgn;
    }
    return sum;
  }
  return (cplx(1.0) + u) * log1p_over(u) - 1.0;
}

}  // namespace detail

/// kappa = Re[1 + z omega'/omega] / |z omega| at z = r e^{i theta}: the
/// curvature of the lifted circle. omega'/omega comes from the analytic
/// logarithmic derivative of the Buff form.
inline double circle_lift_curvature(const BuffForm& form, double r, double theta) {
  cplx z = r * cplx{std::cos(theta), std::sin(theta)};
  double d;
  detail::nearest_fixed_point(form, z, &d);
  if (d < form.pole_guard) fail(errc::pole_proximity, "curvature circle within pole_guard");
  cplx u = derivative_minus_one(form.map, z);
  detail::check_positivity(cplx(1.0) + u, "circle_lift_curvature");
  cplx f2 = second_derivative(form.map, z);
  cplx delta = displacement(form.map, z);
  cplx ell = log1p_over(u);
  // omega'/omega = f''/(f'-1) - (f'-1)/Delta - f''/(f' Log f'), with the first
  // and third terms combined through ((1+u) ell - 1) to tame the cancellation.
  cplx log_deriv =
      f2 * detail::one_plus_u_ell_minus_1(u) / (u * (cplx(1.0) + u) * ell) - u / delta;
  cplx zomega = z * ratio_dminus1_over_log(u, "circle_lift_curvature") / delta;
  return (cplx(1.0) + z * log_deriv).real() / std::abs(zomega);
}

/// Same formula for an explicit field; omega' by 5-point complex finite
/// difference with step 1e-6 r.
inline double circle_lift_curvature(const VectorField& field, double r, double theta) {
  cplx z = r * cplx{std::cos(theta), std::sin(theta)};
  double h = 1e-6 * r;
  auto& w = field.omega;
  cplx der =
      (-w(z + 2 * h) + 8.0 * w(z + h) - 8.0 * w(z - h) + w(z - 2 * h)) / (12.0 * h);
  cplx zomega = z * w(z);
  return (cplx(1.0) + z * der / w(z)).real() / std::abs(zomega);
}

namespace detail {

struct loop_probe {
  bool closed = false;
  bool stayed_inside = false;
  double return_time = 0.0;
  cplx return_point{};
};

/// Integrate the field from z0 around `center` until the ray through z0 is
/// crossed again (total winding 2 pi), the disk is exited, or time runs out.
inline loop_probe trace_loop(const VectorField& field, cplx center, cplx z0, double t_budget) {
  constexpr double rtol = 1e-9, atol = 1e-12;
  loop_probe out;
  out.stayed_inside = true;
  cplx z = z0;
  double t = 0.0, h = t_budget / 1024.0;
  double psi = 0.0;  // unwrapped angle of (z - center) relative to start
  double arg_prev = std::arg(z0 - center);
  auto rhs = [&](cplx w) { return field.chi(w); };

  while (t < t_budget) {
    h = std::min(h, t_budget - t);
    if (h < 1e-15 * std::max(1.0, t)) return out;
    dp45_step st = dp45(rhs, z, h);
    double err = std::abs(st.z5 - st.z4);
    double tol = atol + rtol * std::abs(st.z5);
    if (err <= tol) {
      double arg_new = std::arg(st.z5 - center);
      double dpsi = wrap_angle(arg_new - arg_prev);
      if (!is_finite(st.z5) || std::abs(st.z5) > field.radius * (1.0 + 1e-12)) {
        out.stayed_inside = false;
        return out;
      }
      if (std::abs(psi + dpsi) >= 2.0 * pi) {
        // Bisect the final step onto the section |psi| = 2 pi.
        double lo = 0.0, hi = h;
        cplx zc = st.z5;
        for (int it = 0; it < 60; ++it) {
          double mid = 0.5 * (lo + hi);
          dp45_step sm = dp45(rhs, z, mid);
          double am = std::arg(sm.z5 - center);
          double dm = wrap_angle(am - arg_prev);
          if (std::abs(psi + dm) >= 2.0 * pi) {
            hi = mid;
            zc = sm.z5;
          } else {
            lo = mid;
          }
        }
        out.closed = true;
        out.return_time = t + hi;
        out.return_point = zc;
        return out;
      }
      psi += dpsi;
      arg_prev = arg_new;
      t += h;
      z = st.z5;
    }
    double fac = err > 0.0 ? 0.9 * std::pow(tol / err, 0.2) : 5.0;
    h *= std::clamp(fac, 0.2, 5.0);
  }
  return out;
}

}  // namespace detail

/// Period of the closed trajectories around a simple singularity with purely
/// imaginary residue: tau = 2 pi i res(omega, p), cross-checked against one
/// integrated loop's return time (1e-4 relative agreement).
inline cplx closed_orbit_period(const VectorField& field, cplx p) {
  double nearest = std::numeric_limits<double>::infinity();
  for (cplx s : field.singularities)
    if (std::abs(s - p) > 1e-12) nearest = std::min(nearest, std::abs(s - p));
  double rho = std::min({0.1 * field.radius, nearest / 3.0, (field.radius - std::abs(p)) / 3.0});
  if (!(rho > 0.0)) fail(errc::domain_exceeded, "no room for a residue contour");
  cplx res = quad::circle_residue(field.omega, p, rho);
  if (std::abs(res.real()) > 1e-8 * std::max(1.0, std::abs(res)))
    fail(errc::residue_not_imaginary, "res(omega,p) is not purely imaginary");
  cplx tau = 2.0 * pi * iunit * res;
  if (!(tau.real() > 0.0))
    fail(errc::residue_not_imaginary, "loop period came out non-positive");

  cplx z0 = p + rho;
  detail::loop_probe probe = detail::trace_loop(field, p, z0, 3.0 * tau.real());
  if (!probe.closed || std::abs(probe.return_point - z0) > 1e-3 * std::max(1.0, std::abs(z0 - p)))
    fail(errc::no_closed_orbit, "trajectory from the contour radius did not close");
  if (std::abs(probe.return_time - tau.real()) > 1e-4 * tau.real())
    fail(errc::no_closed_orbit, "return time disagrees with 2 pi i res beyond 1e-4");
  return tau;
}

/// Largest starting radius rho (to 1e-4) along a ray from p whose trajectory
/// loop under the alpha-rotated field closes (returns within 1e-3 of the
/// start) without leaving the disk |z| <= disk_radius; a numerical proxy for
/// the reach of the canonical neighborhood.
inline double canonical_neighborhood_radius(const BuffForm& form, cplx p, cplx alpha,
                                            double disk_radius) {
  if (std::abs(std::abs(alpha) - 1.0) > 1e-12)
    fail(errc::bad_argument, "rotation alpha must be unimodular");
  const FixedPointRecord* rec = nullptr;
  for (const auto& r : form.fixed_points)
    if (std::abs(r.location - p) < 1e-8) rec = &r;
  if (!rec) fail(errc::bad_argument, "p is not a fixed point of the form");

  cplx res_rot = residue_closed_form(*rec) / alpha;
  if (std::abs(res_rot.real()) > 1e-8 * std::max(1.0, std::abs(res_rot)))
    fail(errc::residue_not_imaginary, "rotated field residue is not purely imaginary");
  cplx tau = 2.0 * pi * iunit * res_rot;
  if (!(tau.real() > 0.0)) fail(errc::residue_not_imaginary, "rotated period non-positive");

  VectorField base = field_of(form);
  VectorField rotated;
  rotated.chi = [alpha, base](cplx z) { return alpha * base.chi(z); };
  rotated.omega = [alpha, base](cplx z) { return base.omega(z) / alpha; };
  rotated.singularities = base.singularities;
  rotated.radius = disk_radius;

  cplx seed_dir = std::abs(p) > 1e-12 ? -p / std::abs(p) : cplx(1.0);
  double rho_max = disk_radius - std::abs(p);
  if (std::abs(p) > 1e-12) rho_max = std::min(rho_max, disk_radius + std::abs(p));
  rho_max *= 0.999;

  auto closes = [&](double rho) {
    cplx z0 = p + rho * seed_dir;
    if (std::abs(z0) >= disk_radius) return false;
    try {
      detail::loop_probe probe = detail::trace_loop(rotated, p, z0, 3.0 * tau.real());
      return probe.closed && probe.stayed_inside &&
             std::abs(probe.return_point - z0) <= 1e-3;
    } catch (const error&) {
      return false;
    }
  };

  double lo = rho_max * 1e-3;
  if (!closes(lo)) fail(errc::no_closed_orbit, "no closed loop even near the singularity");
  if (closes(rho_max)) return rho_max;
  double hi = rho_max;
  while (hi - lo > 1e-4) {
    double mid = 0.5 * (lo + hi);
    (closes(mid) ? lo : hi) = mid;
  }
  return lo;
}

}  // namespace buffdyn
