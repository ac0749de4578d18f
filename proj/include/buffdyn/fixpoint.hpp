#pragma once

#include <algorithm>
#include <limits>
#include <optional>
#include <vector>

#include "buffdyn/germ.hpp"
#include "buffdyn/quadrature.hpp"

namespace buffdyn {

struct FixedPointRecord {
  cplx location{};
  cplx multiplier{};            // lambda (or mu along a cycle)
  int multiplicity = 1;         // m
  cplx index{};                 // iota
  cplx resit{};                 // m/2 - iota
  std::optional<cplx> big_lambda;  // 1/Log(multiplier); absent at multiplier 1 or on the cut

  bool parabolic() const { return multiplicity > 1; }
};

struct BifurcationData {
  FixedPointRecord origin;              // fixed point at 0 of the perturbed iterate
  std::vector<FixedPointRecord> cycle;  // the bifurcated q-cycle, sorted by argument
  cplx delta{};                         // 1 - lambda_n^q
  cplx rho{};                           // resit of the limit map at 0
  cplx leading_coefficient{};           // a_n: coefficient of z^{q+1} in the perturbed iterate

  /// a_n p^q / delta for cycle point j; tends to 1 (in the paper's normal
  /// form a = 1, so this reduces to p^q/delta).
  cplx cycle_ratio(size_t j) const {
    return leading_coefficient * ipow(cycle[j].location, int(cycle.size())) / delta;
  }
};

struct SectorSpec {
  int q = 1;
  double theta0 = 0.2;
  enum class kind { repelling_A, attracting_B } sectors = kind::repelling_A;

  SectorSpec(int q_, double theta0_, kind k) : q(q_), theta0(theta0_), sectors(k) {
    if (q < 1) fail(errc::bad_argument, "sector count q must be >= 1");
    if (!(theta0 > 0.0 && theta0 < pi / 2))
      fail(errc::bad_argument, "theta0 must lie in (0, pi/2)");
  }
};

enum class approach { non_tangential, tangential, undetermined };

namespace detail {

constexpr double parabolic_eps = 1e-8;  // |lambda - 1| below this counts as multiplier 1

/// Winding number of z - f(z) on |z - center| = radius.
inline int winding_of_displacement(const AnalyticMap& map, cplx center, double radius) {
  cplx w = quad::circle_residue(
      [&](cplx z) { return derivative_minus_one(map, z) / displacement(map, z); }, center,
      radius, 1e-9);
  double re = w.real();
  int m = int(std::lround(re));
  if (std::abs(re - m) > 0.01 || std::abs(w.imag()) > 0.01)
    fail(errc::root_finder_failure, "winding number did not come out integral");
  return m;
}

inline double nearest_distance(cplx p, const std::vector<cplx>& pts) {
  double d = std::numeric_limits<double>::infinity();
  for (cplx q : pts)
    if (q != p) d = std::min(d, std::abs(q - p));
  return d;
}

}  // namespace detail

/// iota(f,p): closed form 1/(1-lambda) at simple points, contour integral of
/// 1/(z - f(z)) at multiplier-1 points.
inline cplx holomorphic_index(const AnalyticMap& map, cplx p) {
  if (std::abs(displacement(map, p)) > 1e-7 * std::max(1.0, std::abs(p)))
    fail(errc::bad_argument, "holomorphic_index: point is not fixed");
  cplx lam_m1 = derivative_minus_one(map, p);
  if (std::abs(lam_m1) > detail::parabolic_eps) return -1.0 / lam_m1;  // 1/(1-lambda)
  double rho = std::min(1e-2, (map.validity_radius() - std::abs(p)) / 4.0);
  if (!(rho > 0.0)) fail(errc::domain_exceeded, "no room for an index contour");
  // A foreign fixed point inside the contour would corrupt the residue.
  if (detail::winding_of_displacement(map, p, rho) !=
      detail::winding_of_displacement(map, p, rho / 8.0))
    fail(errc::contour_through_fixed_point, "another fixed point within the index contour");
  return quad::circle_residue([&](cplx z) { return -1.0 / displacement(map, z); }, p, rho);
}

inline int fixed_point_multiplicity(const AnalyticMap& map, cplx p) {
  cplx lam_m1 = derivative_minus_one(map, p);
  if (std::abs(lam_m1) > detail::parabolic_eps) return 1;
  double rho = std::min(1e-3, (map.validity_radius() - std::abs(p)) / 4.0);
  return detail::winding_of_displacement(map, p, rho);
}

/// resit(f,p) = m/2 - iota(f,p).
inline cplx resit(const AnalyticMap& map, cplx p) {
  return 0.5 * double(fixed_point_multiplicity(map, p)) - holomorphic_index(map, p);
}

/// Lambda = 1/Log(lambda^q), principal branch.
inline cplx multiplier_param(cplx lambda, int q) {
  cplx lamq = ipow(lambda, q);
  if (std::abs(lamq - 1.0) < 1e-14) fail(errc::unit_multiplier, "lambda^q = 1");
  if (on_log_cut(lamq)) fail(errc::branch_cut, "lambda^q on ]-inf,0]");
  return 1.0 / std::log(lamq);
}

/// Finite-data proxy for the non-tangential approach criterion
/// Im(Lambda)/Re(Lambda) = O(1): decides on the tail (last half) of the list.
inline approach classify_approach(const std::vector<cplx>& lambdas, int q, double bound = 10.0) {
  if (lambdas.size() < 8) fail(errc::insufficient_data, "need at least 8 multipliers");
  std::vector<double> ratio;
  ratio.reserve(lambdas.size());
  for (cplx lam : lambdas) {
    cplx L = multiplier_param(lam, q);
    if (L.real() == 0.0) fail(errc::bad_argument, "|lambda^q| = 1 has no approach ratio");
    ratio.push_back(std::abs(L.imag() / L.real()));
  }
  size_t tail = lambdas.size() / 2;
  double tail_max = 0.0;
  bool increasing = true;
  for (size_t j = lambdas.size() - tail; j < lambdas.size(); ++j) {
    tail_max = std::max(tail_max, ratio[j]);
    if (j > lambdas.size() - tail && ratio[j] < ratio[j - 1] * (1.0 - 1e-9)) increasing = false;
  }
  if (tail_max <= bound) return approach::non_tangential;
  if (increasing) return approach::tangential;
  return approach::undetermined;
}

/// All fixed points of the map in the closed disk |z| <= radius, found by
/// Newton from a 40x40 seed grid, deduplicated, with multiplicities read off
/// winding numbers and cross-checked against the global count.
inline std::vector<FixedPointRecord> find_fixed_points(const AnalyticMap& map, double radius) {
  if (radius > map.validity_radius() * (1.0 + 1e-12))
    fail(errc::domain_exceeded, "search radius exceeds the validity disk");
  const double btol = 1e-6 * std::max(1.0, radius);

  std::vector<cplx> roots;
  const int N = 40;
  const double seed_cap = std::min(radius * 1.05, map.validity_radius());
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < N; ++j) {
      cplx z{(-1.0 + (2.0 * i + 1.0) / N) * radius, (-1.0 + (2.0 * j + 1.0) / N) * radius};
      if (std::abs(z) > seed_cap) continue;
      bool ok = false;
      try {
        for (int it = 0; it < 120; ++it) {
          cplx d = displacement(map, z);
          cplx dp = derivative_minus_one(map, z);
          if (std::abs(dp) < 1e-300) break;
          cplx step = d / dp;
          z -= step;
          if (!is_finite(z) || std::abs(z) > map.validity_radius()) break;
          if (std::abs(step) <= 1e-13 * std::max(1.0, std::abs(z))) {
            ok = true;
            break;
          }
        }
      } catch (const error&) {
        continue;
      }
      if (!ok) continue;
      if (std::abs(z) > radius + btol) continue;
      if (std::abs(displacement(map, z)) > 1e-8) continue;
      roots.push_back(z);
    }
  }
  if (roots.empty()) fail(errc::root_finder_failure, "no fixed points located in the disk");

  // Cluster at 1e-8.
  std::vector<cplx> centers;
  std::vector<int> count;
  for (cplx r : roots) {
    bool merged = false;
    for (size_t k = 0; k < centers.size(); ++k) {
      if (std::abs(r - centers[k]) < 1e-8) {
        centers[k] = (centers[k] * double(count[k]) + r) / double(count[k] + 1);
        ++count[k];
        merged = true;
        break;
      }
    }
    if (!merged) {
      centers.push_back(r);
      count.push_back(1);
    }
  }

  // Newton stalls on a multiple root at the cancellation floor (~sqrt eps),
  // scattering one parabolic root into several nearby clusters; merge
  // fragments whose multipliers are unit to well below parabolic_eps.
  for (bool again = true; again;) {
    again = false;
    for (size_t i = 0; i < centers.size() && !again; ++i) {
      for (size_t j = i + 1; j < centers.size() && !again; ++j) {
        if (std::abs(centers[i] - centers[j]) < 1e-5 &&
            std::abs(derivative_minus_one(map, centers[i])) < 1e-6 &&
            std::abs(derivative_minus_one(map, centers[j])) < 1e-6) {
          centers[i] = (centers[i] * double(count[i]) + centers[j] * double(count[j])) /
                       double(count[i] + count[j]);
          count[i] += count[j];
          centers.erase(centers.begin() + j);
          count.erase(count.begin() + j);
          again = true;
        }
      }
    }
  }

  for (cplx c : centers)
    if (std::abs(std::abs(c) - radius) < btol)
      fail(errc::boundary_root, "fixed point on the disk boundary");

  std::sort(centers.begin(), centers.end(), [](cplx a, cplx b) {
    double ra = std::abs(a), rb = std::abs(b);
    if (ra != rb) return ra < rb;
    return std::arg(a) < std::arg(b);
  });

  std::vector<FixedPointRecord> out;
  for (cplx p : centers) {
    FixedPointRecord rec;
    rec.location = p;
    cplx lam_m1 = derivative_minus_one(map, p);
    rec.multiplier = 1.0 + lam_m1;
    double rho = std::min({1e-3, (map.validity_radius() - std::abs(p)) / 4.0,
                           detail::nearest_distance(p, centers) / 3.0});
    if (!(rho > 1e-12)) fail(errc::root_finder_failure, "fixed points too close to separate");
    rec.multiplicity = detail::winding_of_displacement(map, p, rho);
    if (rec.multiplicity < 1)
      fail(errc::root_finder_failure, "nonpositive multiplicity from winding number");
    if (std::abs(lam_m1) > detail::parabolic_eps) {
      if (rec.multiplicity != 1)
        fail(errc::root_finder_failure, "simple multiplier but multiple winding");
      rec.index = -1.0 / lam_m1;
      if (!on_log_cut(rec.multiplier)) rec.big_lambda = 1.0 / std::log(rec.multiplier);
    } else {
      double rho_index = std::min({1e-2, (map.validity_radius() - std::abs(p)) / 4.0,
                                   detail::nearest_distance(p, centers) / 3.0});
      rec.index = quad::circle_residue(
          [&](cplx z) { return -1.0 / displacement(map, z); }, p, rho_index);
    }
    rec.resit = 0.5 * double(rec.multiplicity) - rec.index;
    out.push_back(rec);
  }

  int total = detail::winding_of_displacement(map, cplx(0.0), radius);
  int found = 0;
  for (const auto& r : out) found += r.multiplicity;
  if (total != found)
    fail(errc::root_finder_failure, "grid search missed fixed points (count mismatch)");
  return out;
}

/// Locate the bifurcation structure of a perturbed iterate: the fixed point
/// at the origin plus the q-cycle, with delta = 1 - lambda_n^q and the limit
/// resit rho.
inline BifurcationData bifurcation_data(const AnalyticMap& limit_map,
                                        const AnalyticMap& perturbed_map, int q, double radius) {
  auto recs = find_fixed_points(perturbed_map, radius);
  if (recs.size() != size_t(q) + 1)
    fail(errc::wrong_count, "expected q+1 simple fixed points in the disk");
  for (const auto& r : recs)
    if (std::abs(r.multiplier - 1.0) < 1e-10)
      fail(errc::degenerate, "multiplier within 1e-10 of 1");

  size_t origin_idx = 0;
  for (size_t k = 1; k < recs.size(); ++k)
    if (std::abs(recs[k].location) < std::abs(recs[origin_idx].location)) origin_idx = k;

  BifurcationData data;
  data.origin = recs[origin_idx];
  for (size_t k = 0; k < recs.size(); ++k)
    if (k != origin_idx) data.cycle.push_back(recs[k]);
  std::sort(data.cycle.begin(), data.cycle.end(),
            [](const FixedPointRecord& a, const FixedPointRecord& b) {
              return std::arg(a.location) < std::arg(b.location);
            });

  for (const auto& r : data.cycle)
    if (std::abs(r.multiplier - data.cycle.front().multiplier) > 1e-8)
      fail(errc::degenerate, "cycle multipliers disagree beyond 1e-8");

  // When the base map is available, check it permutes the cycle by a fixed
  // rotation of the argument-sorted labels.
  if (perturbed_map.is_iterate() && perturbed_map.power() == q && q > 1) {
    AnalyticMap base = AnalyticMap::polynomial(perturbed_map.coefficients(),
                                               perturbed_map.validity_radius());
    int shift = -1;
    for (int j = 0; j < q; ++j) {
      cplx img = evaluate(base, data.cycle[j].location);
      int hit = -1;
      for (int k = 0; k < q; ++k)
        if (std::abs(img - data.cycle[k].location) < 1e-7) hit = k;
      if (hit < 0) fail(errc::wrong_count, "base map does not permute the located cycle");
      int s = (hit - j + q) % q;
      if (shift < 0) shift = s;
      if (s != shift) fail(errc::wrong_count, "cycle labels are not rotated consistently");
    }
  }

  data.delta = 1.0 - data.origin.multiplier;
  data.rho = resit(limit_map, cplx(0.0));
  data.leading_coefficient = taylor_coefficients(perturbed_map, cplx(0.0), q + 1)[q + 1];
  return data;
}

/// Sector index j in 1..q containing arg(p), or nullopt.
inline std::optional<int> sector_label(cplx p, const SectorSpec& spec) {
  double r = std::abs(p);
  if (!(r > 0.0 && r < 1.0)) fail(errc::bad_argument, "sector_label needs 0 < |p| < 1");
  double halfwidth = (pi / 2.0 - spec.theta0 / 2.0) / spec.q;
  double theta = std::arg(p);
  for (int j = 1; j <= spec.q; ++j) {
    double center = (spec.sectors == SectorSpec::kind::repelling_A)
                        ? 2.0 * j * pi / spec.q
                        : (2.0 * j - 1.0) * pi / spec.q;
    if (std::abs(wrap_angle(theta - center)) < halfwidth) return j;
  }
  return std::nullopt;
}

/// |Lambda_n + q M_n - rho|, the sum-rule deviation for one family member.
inline double sum_rule_check(const BifurcationData& data) {
  if (!data.origin.big_lambda || data.cycle.empty() || !data.cycle.front().big_lambda)
    fail(errc::unit_multiplier, "Lambda or M undefined for this member");
  cplx sum = *data.origin.big_lambda +
             double(data.cycle.size()) * (*data.cycle.front().big_lambda);
  return std::abs(sum - data.rho);
}

}  // namespace buffdyn
