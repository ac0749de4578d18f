#pragma once

#include <complex>
#include <optional>
#include <stdexcept>
#include <string>

namespace buffdyn {

enum class errc {
  domain_exceeded,
  non_finite,
  orbit_escaped,
  no_convergence,
  critical_point_nearby,
  quadrature_failure,
  root_finder_failure,
  boundary_root,
  contour_through_fixed_point,
  contour_conflict,
  branch_cut,
  unit_multiplier,
  insufficient_data,
  wrong_count,
  degenerate,
  pole_proximity,
  positivity_violated,
  segment_near_pole,
  path_near_pole,
  integration_failure,
  inverse_failure,
  fixed_point_input,
  family_too_short,
  fixed_point_count,
  bad_argument,
  residue_not_imaginary,
  no_closed_orbit,
  step_underflow,
  non_escaping,
  newton_divergence,
  ray_lands_inside,
  grid_mismatch,
  empty_ray,
  config_parse,
  io_error,
};

inline const char* errc_name(errc c) {
  switch (c) {
    case errc::domain_exceeded: return "domain-exceeded";
    case errc::non_finite: return "non-finite";
    case errc::orbit_escaped: return "orbit-escaped";
    case errc::no_convergence: return "no-convergence";
    case errc::critical_point_nearby: return "critical-point-nearby";
    case errc::quadrature_failure: return "quadrature-failure";
    case errc::root_finder_failure: return "root-finder-failure";
    case errc::boundary_root: return "boundary-root";
    case errc::contour_through_fixed_point: return "contour-through-fixed-point";
    case errc::contour_conflict: return "contour-conflict";
    case errc::branch_cut: return "branch-cut";
    case errc::unit_multiplier: return "unit-multiplier";
    case errc::insufficient_data: return "insufficient-data";
    case errc::wrong_count: return "wrong-count";
    case errc::degenerate: return "degenerate";
    case errc::pole_proximity: return "pole-proximity";
    case errc::positivity_violated: return "positivity-violated";
    case errc::segment_near_pole: return "segment-near-pole";
    case errc::path_near_pole: return "path-near-pole";
    case errc::integration_failure: return "integration-failure";
    case errc::inverse_failure: return "inverse-failure";
    case errc::fixed_point_input: return "fixed-point-input";
    case errc::family_too_short: return "family-too-short";
    case errc::fixed_point_count: return "fixed-point-count";
    case errc::bad_argument: return "bad-argument";
    case errc::residue_not_imaginary: return "residue-not-imaginary";
    case errc::no_closed_orbit: return "no-closed-orbit-found";
    case errc::step_underflow: return "step-underflow";
    case errc::non_escaping: return "non-escaping";
    case errc::newton_divergence: return "newton-divergence";
    case errc::ray_lands_inside: return "ray-lands-inside";
    case errc::grid_mismatch: return "grid-mismatch";
    case errc::empty_ray: return "empty-ray";
    case errc::config_parse: return "config-parse";
    case errc::io_error: return "io-error";
  }
  return "unknown";
}

/// Library-wide exception; carries an error code and, for pole-related
/// failures, the offending pole.
class error : public std::runtime_error {
 public:
  error(errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
  error(errc code, const std::string& what, std::complex<double> pole)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code), pole_(pole) {}

  errc code() const noexcept { return code_; }
  const std::optional<std::complex<double>>& pole() const noexcept { return pole_; }

 private:
  errc code_;
  std::optional<std::complex<double>> pole_;
};

[[noreturn]] inline void fail(errc code, const std::string& what) { throw error(code, what); }
[[noreturn]] inline void fail(errc code, const std::string& what, std::complex<double> pole) {
  throw error(code, what, pole);
}

}  // namespace buffdyn
