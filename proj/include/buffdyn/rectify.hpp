#pragma once

#include <atomic>
#include <thread>
#include <vector>

#include "buffdyn/buffform.hpp"
#include "buffdyn/path.hpp"

namespace buffdyn {

/// Image of a path under analytic continuation of the rectifying coordinate,
/// branch tracked purely by continuity along a refinement of the base path.
struct LiftedPath {
  PathPolyline base;         // refined polyline (original vertices included)
  std::vector<cplx> values;  // Z along the refinement, values[0] = start_value
  cplx start_value{};

  cplx net_translation() const { return values.back() - values.front(); }
};

struct ConeSpec {
  cplx apex{};
  double epsilon = 0.5;
  enum class half { plus, minus } sign = half::plus;

  ConeSpec(cplx apex_, double eps, half s) : apex(apex_), epsilon(eps), sign(s) {
    if (!(eps > 0.0 && eps < 1.0)) fail(errc::bad_argument, "cone epsilon must be in (0,1)");
  }
};

struct TheoremAReport {
  double epsilon = 0.0;
  double radius_found = 0.0;
  int family_index_start = -1;  // index into the supplied family
  int grid_size = 0;
  int t_samples = 0;
  double max_ratio = 0.0;  // max over the passing sweep of |u_{n,t}|/t
  bool pass = false;
  std::vector<double> forward_by_index;  // per-member grid maxima at radius_found
  std::vector<double> backward_by_index;
};

namespace detail {

inline void check_path_clear(const BuffForm& form, cplx a, cplx b) {
  for (const auto& r : form.fixed_points) {
    if (dist_point_segment(r.location, a, b) < form.pole_guard)
      throw error(errc::path_near_pole, "path segment within pole_guard of a pole",
                  r.location);
  }
}

}  // namespace detail

/// Integral of omega along the path, adaptive Gauss-Legendre per sub-segment.
inline cplx integrate_path(const BuffForm& form, const PathPolyline& path) {
  if (path.vertices.size() < 2) fail(errc::bad_argument, "path needs at least 2 vertices");
  cplx total = 0.0;
  for (size_t k = 0; k + 1 < path.vertices.size(); ++k) {
    cplx a = path.vertices[k], b = path.vertices[k + 1];
    if (a == b) continue;
    detail::check_inside(form.map, a);
    detail::check_inside(form.map, b);
    detail::check_path_clear(form, a, b);
    total += quad::integrate_segment(
        [&](cplx s) { return detail::omega_unguarded(form, s); }, a, b);
  }
  return total;
}

/// Lift of the path under the rectifying coordinate: cumulative integrals of
/// omega appended to start_value, base segments split until each lifted step
/// has |dZ| <= 0.1.
inline LiftedPath lift_path(const BuffForm& form, const PathPolyline& path, cplx start_value) {
  if (path.vertices.empty()) fail(errc::bad_argument, "empty path");
  LiftedPath out;
  out.start_value = start_value;
  out.base.vertices.push_back(path.vertices.front());
  out.values.push_back(start_value);

  auto omega_fn = [&](cplx s) { return detail::omega_unguarded(form, s); };
  cplx cum = start_value;

  struct frame {
    cplx a, b;
  };
  for (size_t k = 0; k + 1 < path.vertices.size(); ++k) {
    cplx a = path.vertices[k], b = path.vertices[k + 1];
    if (a == b) continue;
    detail::check_inside(form.map, a);
    detail::check_inside(form.map, b);
    detail::check_path_clear(form, a, b);
    std::vector<frame> stack{{a, b}};
    int guard = 0;
    while (!stack.empty()) {
      frame f = stack.back();
      stack.pop_back();
      // tight per-chord tolerance: long lifts accumulate hundreds of chords
      cplx dz = quad::integrate_segment(omega_fn, f.a, f.b, 1e-12);
      if (std::abs(dz) > 0.1 && std::abs(f.b - f.a) > 1e-13) {
        if (++guard > (1 << 22)) fail(errc::integration_failure, "lift refinement blow-up");
        cplx m = 0.5 * (f.a + f.b);
        stack.push_back({m, f.b});
        stack.push_back({f.a, m});
        continue;
      }
      cum += dz;
      out.base.vertices.push_back(f.b);
      out.values.push_back(cum);
    }
  }
  return out;
}

/// Monodromy translation 2 pi i res(omega_f, p) acquired around the fixed
/// point p.
inline cplx monodromy(const BuffForm& form, cplx p) {
  for (const auto& r : form.fixed_points)
    if (std::abs(r.location - p) < 1e-8 * std::max(1.0, std::abs(p)))
      return 2.0 * pi * iunit * residue_closed_form(r);
  fail(errc::bad_argument, "monodromy: p is not a fixed point of the form");
}

/// One step of the lifted dynamics F : Z -> Z + 1 + u_f over z -> f(z).
inline std::pair<cplx, cplx> lifted_step(const BuffForm& form, cplx z, cplx Z) {
  for (const auto& r : form.fixed_points)
    if (std::abs(z - r.location) < 1e-13 * std::max(1.0, std::abs(r.location)))
      fail(errc::fixed_point_input, "lifted_step at a fixed point");
  cplx z_next = z + displacement(form.map, z);
  cplx Z_next = Z + 1.0 + u_f(form, z);
  return {z_next, Z_next};
}

/// Inverse step: z_prev = f^{-1}(z) by Newton from the seed, and Z_prev such
/// that lifted_step(z_prev, Z_prev) returns (z, Z).
inline std::pair<cplx, cplx> lifted_step_inverse(const BuffForm& form, cplx z, cplx Z,
                                                 cplx seed) {
  cplx z_prev;
  try {
    z_prev = local_inverse(form.map, z, seed);
  } catch (const error& e) {
    throw error(errc::inverse_failure, e.what());
  }
  detail::check_segment_clear(form, z, z_prev, "lifted_step_inverse");
  cplx uhat = 1.0 + quad::integrate_segment(
                        [&](cplx s) { return detail::omega_unguarded(form, s); }, z, z_prev);
  return {z_prev, Z - 1.0 + uhat};
}

/// Membership of `point` in the epsilon-cone with the given apex.
inline bool cone_contains(const ConeSpec& cone, cplx point) {
  if (point == cone.apex) fail(errc::bad_argument, "cone test at the apex");
  double ang = std::arg(point - cone.apex);
  if (cone.sign == ConeSpec::half::minus) ang = wrap_angle(ang - pi);
  return std::abs(ang) < std::asin(cone.epsilon);
}

struct TheoremAGrid {
  int angles = 24;
  int radii = 12;
};

namespace detail {

/// Max over the polar grid and t-samples of |u_{n,t}(z)|/t, forward and
/// backward; grid points within pole_guard of a fixed point are skipped, as
/// are samples whose integration segment crosses the guard.
inline std::pair<double, double> theorem_a_member_max(const BuffForm& form, double r,
                                                      const TheoremAGrid& grid, int t_steps,
                                                      int threads) {
  std::vector<cplx> points;
  for (int i = 0; i < grid.radii; ++i) {
    double rad = r * double(i + 1) / grid.radii;
    for (int j = 0; j < grid.angles; ++j) {
      double th = 2.0 * pi * j / grid.angles;
      cplx z = rad * cplx{std::cos(th), std::sin(th)};
      double d;
      nearest_fixed_point(form, z, &d);
      if (d < form.pole_guard) continue;
      points.push_back(z);
    }
  }

  auto omega_fn = [&](cplx s) { return omega_unguarded(form, s); };
  auto sample = [&](cplx z, double& fwd, double& bwd) {
    // forward: cumulative integrals along [z, z_t] for t = k/t_steps
    try {
      u_series series = build_u_series(form, z);
      cplx d = displacement(form.map, z);
      if (d == cplx(0.0)) return;
      check_segment_clear(form, z, z + d, "sweep");
      if (series.usable) {
        for (int k = 1; k <= t_steps; ++k) {
          double t = double(k) / t_steps;
          fwd = std::max(fwd, std::abs(series.integral(t)) / t);
        }
      } else {
        cplx acc = 0.0;
        cplx prev = z;
        for (int k = 1; k <= t_steps; ++k) {
          double t = double(k) / t_steps;
          cplx zt = z + t * d;
          acc += quad::integrate_segment(omega_fn, prev, zt);
          prev = zt;
          fwd = std::max(fwd, std::abs(acc - t) / t);
        }
      }
    } catch (const error&) {
      // sample skipped (guarded segment)
    }
    try {
      cplx zp = local_inverse(form.map, z, z);
      check_segment_clear(form, z, zp, "sweep");
      cplx dd = zp - z;
      cplx acc = 0.0;
      cplx prev = z;
      for (int k = 1; k <= t_steps; ++k) {
        double t = double(k) / t_steps;
        cplx zt = z + t * dd;
        acc += quad::integrate_segment(omega_fn, prev, zt);
        prev = zt;
        bwd = std::max(bwd, std::abs(acc + t) / t);
      }
    } catch (const error&) {
    }
  };

  int nthreads = threads > 0 ? threads : int(std::thread::hardware_concurrency());
  nthreads = std::max(1, std::min<int>(nthreads, int(points.size())));
  std::vector<double> fmax(nthreads, 0.0), bmax(nthreads, 0.0);
  std::atomic<size_t> next{0};
  auto worker = [&](int id) {
    for (;;) {
      size_t k = next.fetch_add(1);
      if (k >= points.size()) break;
      sample(points[k], fmax[id], bmax[id]);
    }
  };
  if (nthreads == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < nthreads; ++i) pool.emplace_back(worker, i);
    for (auto& th : pool) th.join();
  }
  double fwd = 0.0, bwd = 0.0;
  for (int i = 0; i < nthreads; ++i) {
    fwd = std::max(fwd, fmax[i]);
    bwd = std::max(bwd, bmax[i]);
  }
  return {fwd, bwd};
}

}  // namespace detail

/// Desk-scale near-translation sweep: searches the candidate radii (largest first)
/// for the largest r and smallest family start index with
/// max |u_{n,t}|/t < epsilon over the grid, for both the forward and the
/// inverse lifts.
inline TheoremAReport verify_theorem_a(const AnalyticMap& limit_map,
                                       const std::vector<AnalyticMap>& family, int q,
                                       double epsilon, std::vector<double> radii,
                                       const TheoremAGrid& grid = {}, int t_steps = 16,
                                       int threads = 0) {
  if (!(epsilon > 0.0 && epsilon < 1.0))
    fail(errc::bad_argument, "epsilon must lie in (0,1)");
  if (family.empty()) fail(errc::family_too_short, "empty family");
  if (radii.empty()) fail(errc::bad_argument, "no candidate radii");

  // The limit map must carry the expected parabolic point at 0 ...
  {
    auto recs = find_fixed_points(limit_map, limit_map.validity_radius());
    bool ok = false;
    for (const auto& rec : recs)
      if (std::abs(rec.location) < 1e-10 && rec.multiplicity == q + 1) ok = true;
    if (!ok) fail(errc::fixed_point_count, "limit map lacks a multiplicity q+1 point at 0");
  }
  // ... and every member the bifurcated structure of q+1 fixed points.
  std::vector<BuffForm> forms;
  forms.reserve(family.size());
  for (const auto& m : family) {
    BuffForm f = make_buff_form(m);
    if (f.fixed_points.size() != size_t(q) + 1)
      fail(errc::fixed_point_count, "family member without q+1 fixed points");
    forms.push_back(std::move(f));
  }

  std::sort(radii.begin(), radii.end(), std::greater<>());
  TheoremAReport report;
  report.epsilon = epsilon;
  report.grid_size = grid.angles * grid.radii;
  report.t_samples = t_steps;

  for (double r : radii) {
    if (r >= limit_map.validity_radius()) continue;
    std::vector<double> fwd(family.size(), -1.0), bwd(family.size(), -1.0);
    int start = -1;
    for (int n = int(family.size()) - 1; n >= 0; --n) {
      auto [f, b] = detail::theorem_a_member_max(forms[n], r, grid, t_steps, threads);
      fwd[n] = f;
      bwd[n] = b;
      if (std::max(f, b) >= epsilon) break;
      start = n;
    }
    if (start >= 0) {
      report.pass = true;
      report.radius_found = r;
      report.family_index_start = start;
      report.forward_by_index = fwd;
      report.backward_by_index = bwd;
      double m = 0.0;
      for (size_t n = start; n < family.size(); ++n)
        m = std::max({m, fwd[n], bwd[n]});
      report.max_ratio = m;
      return report;
    }
    report.forward_by_index = fwd;  // diagnostics from the last radius tried
    report.backward_by_index = bwd;
    report.max_ratio = std::max(fwd.back(), bwd.back());
  }
  report.pass = false;
  report.radius_found = 0.0;
  report.family_index_start = -1;
  return report;
}

}  // namespace buffdyn
