#pragma once

#include <string>
#include <vector>

#include "buffdyn/config.hpp"
#include "buffdyn/flow.hpp"
#include "buffdyn/serialize.hpp"
#include "buffdyn/svg.hpp"

namespace buffdyn {

struct RunOutput {
  std::string experiment;
  ordered_json report;
  std::vector<Table> tables;
  std::vector<std::pair<std::string, std::string>> figures;  // filename -> svg text
  int exit_code = 0;  // 0 pass, 2 quantitative failure
};

namespace experiments {

inline ordered_json echo_family(const cfg::FamilySpec& fam) {
  ordered_json j;
  ordered_json coeffs = ordered_json::array();
  for (cplx c : fam.coefficients) coeffs.push_back(json_of(c));
  j["coefficients"] = coeffs;
  j["c"] = json_of(fam.c);
  j["n_start"] = fam.n_start;
  j["n_end"] = fam.n_end;
  j["power"] = fam.power;
  j["radius"] = fam.radius;
  return j;
}

// ---------------------------------------------------------------------- //
//  theorem_a: epsilon-cone sweep over a multiplier family                 //
// ---------------------------------------------------------------------- //

inline RunOutput theorem_a(const Config& config, int threads) {
  const ConfigSection& g = config.global();
  cfg::FamilySpec fam = cfg::get_family(config);
  int q = cfg::get_int(g, "q", fam.power);
  double epsilon = cfg::get_double(g, "epsilon", 0.25);
  std::vector<double> radii = cfg::get_double_list(g, "radii");
  TheoremAGrid grid{cfg::get_int(g, "grid_angles", 24), cfg::get_int(g, "grid_radii", 12)};
  int t_samples = cfg::get_int(g, "t_samples", 16);

  TheoremAReport rep = verify_theorem_a(fam.limit(), fam.members(), q, epsilon, radii, grid,
                                        t_samples, threads);

  RunOutput out;
  out.experiment = "theorem_a";
  out.report["experiment"] = "theorem_a";
  out.report["inputs"] = echo_family(fam);
  out.report["inputs"]["q"] = q;
  out.report["inputs"]["radii"] = radii;
  out.report["result"] = json_of(rep);
  if (rep.pass) out.report["result"]["family_start_n"] = fam.n_start + rep.family_index_start;
  out.report["pass"] = rep.pass;
  out.exit_code = rep.pass ? 0 : 2;

  Table t;
  t.name = "ratios";
  t.header = {"n", "forward_max", "backward_max"};
  for (size_t k = 0; k < rep.forward_by_index.size(); ++k) {
    if (rep.forward_by_index[k] < 0.0) continue;  // not reached by the sweep
    t.add_row({std::to_string(fam.n_start + int(k)), fmt17(rep.forward_by_index[k]),
               fmt17(rep.backward_by_index[k])});
  }
  out.tables.push_back(std::move(t));
  return out;
}

// ---------------------------------------------------------------------- //
//  est2: a_n p^q / delta_n -> 1 along the family                          //
// ---------------------------------------------------------------------- //

inline RunOutput est2(const Config& config) {
  const ConfigSection& g = config.global();
  cfg::FamilySpec fam = cfg::get_family(config);
  int q = cfg::get_int(g, "q", fam.power);
  double search_radius = cfg::get_double(g, "search_radius", fam.radius);
  double final_tol = cfg::get_double(g, "final_tolerance", 0.05);

  AnalyticMap limit = fam.limit();
  std::vector<double> devs;
  Table t;
  t.name = "ratios";
  t.header = {"n", "delta_re", "delta_im", "ratio_re", "ratio_im", "deviation"};
  for (int n = fam.n_start; n <= fam.n_end; ++n) {
    BifurcationData data = bifurcation_data(limit, fam.member(n), q, search_radius);
    double dev = 0.0;
    for (size_t j = 0; j < data.cycle.size(); ++j)
      dev = std::max(dev, std::abs(data.cycle_ratio(j) - 1.0));
    devs.push_back(dev);
    cplx r0 = data.cycle_ratio(0);
    t.add_row({std::to_string(n), fmt17(data.delta.real()), fmt17(data.delta.imag()),
               fmt17(r0.real()), fmt17(r0.imag()), fmt17(dev)});
  }

  bool final_ok = devs.back() < final_tol;
  bool tail_decreasing = true;
  bool all_tiny = true;
  for (size_t k = devs.size() / 2 + 1; k < devs.size(); ++k)
    if (devs[k] > devs[k - 1] * (1.0 + 1e-12)) tail_decreasing = false;
  for (double d : devs)
    if (d > 1e-12) all_tiny = false;
  bool pass = final_ok && (tail_decreasing || all_tiny);

  RunOutput out;
  out.experiment = "est2";
  out.report["experiment"] = "est2";
  out.report["inputs"] = echo_family(fam);
  out.report["inputs"]["q"] = q;
  out.report["final_deviation"] = devs.back();
  out.report["final_tolerance"] = final_tol;
  out.report["tail_decreasing"] = tail_decreasing;
  out.report["all_below_1e-12"] = all_tiny;
  out.report["pass"] = pass;
  out.exit_code = pass ? 0 : 2;
  out.tables.push_back(std::move(t));
  return out;
}

// ---------------------------------------------------------------------- //
//  sum_rule: |Lambda_n + q M_n - rho| under a desk-scale envelope         //
// ---------------------------------------------------------------------- //

inline RunOutput sum_rule(const Config& config) {
  const ConfigSection& g = config.global();
  cfg::FamilySpec fam = cfg::get_family(config);
  int q = cfg::get_int(g, "q", fam.power);
  double search_radius = cfg::get_double(g, "search_radius", fam.radius);
  double envelope = cfg::get_double(g, "envelope", 2.0);
  int n_from = cfg::get_int(g, "n_from", 16);

  AnalyticMap limit = fam.limit();
  bool pass = true;
  Table t;
  t.name = "deviations";
  t.header = {"n", "lambda_re", "lambda_im", "M_re", "M_im", "deviation", "bound", "checked"};
  for (int n = fam.n_start; n <= fam.n_end; ++n) {
    BifurcationData data = bifurcation_data(limit, fam.member(n), q, search_radius);
    double dev = sum_rule_check(data);
    double bound = envelope / n;
    bool checked = n >= n_from;
    if (checked && dev >= bound) pass = false;
    cplx L = *data.origin.big_lambda;
    cplx M = *data.cycle.front().big_lambda;
    t.add_row({std::to_string(n), fmt17(L.real()), fmt17(L.imag()), fmt17(M.real()),
               fmt17(M.imag()), fmt17(dev), fmt17(bound), checked ? "1" : "0"});
  }

  RunOutput out;
  out.experiment = "sum_rule";
  out.report["experiment"] = "sum_rule";
  out.report["inputs"] = echo_family(fam);
  out.report["inputs"]["q"] = q;
  out.report["envelope"] = envelope;
  out.report["n_from"] = n_from;
  out.report["pass"] = pass;
  out.exit_code = pass ? 0 : 2;
  out.tables.push_back(std::move(t));
  return out;
}

// ---------------------------------------------------------------------- //
//  theorem_b: landing and uniform convergence of external-ray tails       //
// ---------------------------------------------------------------------- //

inline AnalyticMap quadratic_c_map(cplx c) {
  return AnalyticMap::polynomial({c, 0.0, 1.0}, 8.0);
}

inline RunOutput theorem_b(const Config& config) {
  const ConfigSection& g = config.global();
  RayAngle theta = cfg::get_angle(g, "theta");
  int q = cfg::get_int(g, "q", 1);
  std::vector<cplx> c_values = cfg::get_complex_list(g, "c_values");
  cplx c_limit = cfg::get_complex(g, "c_limit");
  double t_min = cfg::get_double(g, "t_min", -2048.0);
  double dt = cfg::get_double(g, "dt", 1.0 / 32);
  double landing_tol = cfg::get_double(g, "landing_tol", 1e-6);
  double final_max = cfg::get_double(g, "final_max", 1e-2);
  bool expect_tame = cfg::get_string(g, "expect", "tame") == "tame";

  RayTail limit_ray = trace_ray(quadratic_c_map(c_limit), theta, q, t_min, dt);

  Table t;
  t.name = "rows";
  t.header = {"index",      "c_re",      "c_im",    "landed", "landing_re",
              "landing_im", "repelling", "uniform", "hausdorff"};
  bool all_land_repelling = true;
  std::vector<double> uniforms;
  ordered_json rays_json = ordered_json::array();
  RunOutput out;
  for (size_t k = 0; k < c_values.size(); ++k) {
    AnalyticMap P = quadratic_c_map(c_values[k]);
    RayTail ray = trace_ray(P, theta, q, t_min, dt);
    auto fps = find_fixed_points(P, 2.0);
    std::vector<cplx> candidates;
    for (const auto& r : fps) candidates.push_back(r.location);
    auto land = landing_point(ray, candidates, landing_tol);
    bool repelling = false;
    if (land) {
      for (const auto& r : fps)
        if (std::abs(r.location - *land) < 1e-12 && std::abs(r.multiplier) > 1.0)
          repelling = true;
    }
    if (!land || !repelling) all_land_repelling = false;
    double uni = uniform_parameter_distance(ray, limit_ray);
    double haus = hausdorff_distance(ray, limit_ray);
    uniforms.push_back(uni);
    t.add_row({std::to_string(k), fmt17(c_values[k].real()), fmt17(c_values[k].imag()),
               land ? "1" : "0", land ? fmt17(land->real()) : "",
               land ? fmt17(land->imag()) : "", repelling ? "1" : "0", fmt17(uni),
               fmt17(haus)});
    rays_json.push_back(json_of(ray));
  }

  bool decreasing = true;
  for (size_t k = 1; k < uniforms.size(); ++k)
    if (uniforms[k] >= uniforms[k - 1]) decreasing = false;
  bool converged = decreasing && !uniforms.empty() && uniforms.back() < final_max;
  bool pass = !expect_tame || (all_land_repelling && converged);

  out.experiment = "theorem_b";
  ordered_json report;
  report["experiment"] = "theorem_b";
  report["inputs"]["theta"] = std::to_string(theta.num) + "/" + std::to_string(theta.den);
  report["inputs"]["q"] = q;
  report["inputs"]["c_limit"] = json_of(c_limit);
  report["inputs"]["t_min"] = t_min;
  report["inputs"]["dt"] = dt;
  report["limit_ray"] = json_of(limit_ray);
  report["rays"] = rays_json;
  report["all_land_repelling"] = all_land_repelling;
  report["uniform_convergence_detected"] = converged;
  if (!converged) report["note"] = "no uniform convergence detected";
  report["pass"] = pass;
  out.report = std::move(report);
  out.exit_code = pass ? 0 : 2;
  out.tables.push_back(std::move(t));
  return out;
}

// ---------------------------------------------------------------------- //
//  gate: near-miss rays must separate the fixed points in the disk        //
// ---------------------------------------------------------------------- //

inline RunOutput gate(const Config& config) {
  const ConfigSection& g = config.global();
  RayAngle theta = cfg::get_angle(g, "theta");
  int q = cfg::get_int(g, "q", 1);
  std::vector<cplx> c_values = cfg::get_complex_list(g, "c_values");
  double t_min = cfg::get_double(g, "t_min", -80.0);
  double dt = cfg::get_double(g, "dt", 1.0 / 32);
  cplx center = cfg::get_complex(g, "disk_center");
  double radius = cfg::get_double(g, "disk_radius");
  bool expect = cfg::get_string(g, "expect_crossing", "true") == "true";

  Table t;
  t.name = "rows";
  t.header = {"index", "c_re", "c_im", "crossed"};
  bool pass = true;
  RunOutput out;
  for (size_t k = 0; k < c_values.size(); ++k) {
    AnalyticMap P = quadratic_c_map(c_values[k]);
    RayTail ray = trace_ray(P, theta, q, t_min, dt);
    std::vector<cplx> fps;
    for (const auto& r : find_fixed_points(P, 2.0)) fps.push_back(r.location);
    bool crossed = detect_gate_crossing(ray, fps, center, radius);
    if (crossed != expect) pass = false;
    t.add_row({std::to_string(k), fmt17(c_values[k].real()), fmt17(c_values[k].imag()),
               crossed ? "1" : "0"});
    out.tables.push_back(ray_table("ray_" + std::to_string(k), ray));

    // figure: the ray, the gate disk, and the fixed points
    SvgFigure fig(center.real() - 2 * radius, center.real() + 2 * radius,
                  center.imag() - 2 * radius, center.imag() + 2 * radius);
    fig.ring(center, radius, "#999999");
    std::vector<cplx> clipped;
    for (cplx z : ray.z)
      if (std::abs(z - center) < 2.5 * radius) clipped.push_back(z);
    fig.polyline(clipped, SvgFigure::palette(1), 1.5);
    for (cplx p : fps) fig.dot(p, 3.5, "#000000");
    fig.text(10, 20, "gate disk r=" + fmt17(radius) + (crossed ? " crossed" : " not crossed"));
    out.figures.emplace_back("gate_" + std::to_string(k) + ".svg", fig.str());
  }

  out.experiment = "gate";
  out.report["experiment"] = "gate";
  out.report["inputs"]["theta"] = std::to_string(theta.num) + "/" + std::to_string(theta.den);
  out.report["inputs"]["disk_center"] = json_of(center);
  out.report["inputs"]["disk_radius"] = radius;
  out.report["pass"] = pass;
  out.exit_code = pass ? 0 : 2;
  out.tables.insert(out.tables.begin(), std::move(t));
  return out;
}

// ---------------------------------------------------------------------- //
//  residue_audit: closed-form vs quadrature residues of omega_f           //
// ---------------------------------------------------------------------- //

inline RunOutput residue_audit(const Config& config) {
  const ConfigSection& g = config.global();
  double tol = cfg::get_double(g, "tolerance", 1e-8);
  auto map_sections = config.all_sections("map");
  if (map_sections.empty()) fail(errc::config_parse, "residue_audit needs [map] sections");

  Table t;
  t.name = "residues";
  t.header = {"map",        "fp_re",      "fp_im",   "multiplicity", "closed_re",
              "closed_im",  "numeric_re", "numeric_im", "abs_error"};
  double worst = 0.0;
  int audited = 0;
  for (size_t mi = 0; mi < map_sections.size(); ++mi) {
    AnalyticMap map = cfg::get_map(*map_sections[mi]);
    BuffForm form = make_buff_form(map);
    for (const auto& rec : form.fixed_points) {
      double nearest = std::numeric_limits<double>::infinity();
      for (const auto& other : form.fixed_points)
        if (std::abs(other.location - rec.location) > 1e-12)
          nearest = std::min(nearest, std::abs(other.location - rec.location));
      double rho = std::min({map.validity_radius() / 8.0, nearest / 3.0, 0.05});
      double margin = (map.validity_radius() - std::abs(rec.location)) / 2.0;
      rho = std::min(rho, margin);
      cplx closed = residue_closed_form(rec);
      cplx numeric = residue_numeric(form, rec.location, rho);
      double err = std::abs(closed - numeric);
      worst = std::max(worst, err);
      ++audited;
      t.add_row({std::to_string(mi), fmt17(rec.location.real()), fmt17(rec.location.imag()),
                 std::to_string(rec.multiplicity), fmt17(closed.real()), fmt17(closed.imag()),
                 fmt17(numeric.real()), fmt17(numeric.imag()), fmt17(err)});
    }
  }
  bool pass = worst < tol;

  RunOutput out;
  out.experiment = "residue_audit";
  out.report["experiment"] = "residue_audit";
  out.report["maps"] = map_sections.size();
  out.report["fixed_points_audited"] = audited;
  out.report["worst_error"] = worst;
  out.report["tolerance"] = tol;
  out.report["pass"] = pass;
  out.exit_code = pass ? 0 : 2;
  out.tables.push_back(std::move(t));
  return out;
}

// ---------------------------------------------------------------------- //
//  phase_portrait: trajectories of the (rotated) field, as SVG            //
// ---------------------------------------------------------------------- //

inline RunOutput phase_portrait(const Config& config) {
  const ConfigSection& g = config.global();
  int n_traj = cfg::get_int(g, "trajectories", 24);
  double t_span = cfg::get_double(g, "t_span", 60.0);
  cplx alpha = cfg::get_complex(g, "direction", cplx(1, 0));

  VectorField field;
  double disk;
  std::string kind;
  if (const ConfigSection* ms = config.find_section("map")) {
    AnalyticMap map = cfg::get_map(*ms);
    BuffForm form = make_buff_form(map);
    field = field_of(form);
    disk = cfg::get_double(g, "disk", 0.9 * map.validity_radius());
    kind = "buff_field";
  } else {
    int m = cfg::get_int(g, "m");
    cplx c = cfg::get_complex(g, "c", cplx(0, 0));
    disk = cfg::get_double(g, "disk", 1.0);
    field = normal_form_field(m, c, disk);
    kind = "normal_form";
  }
  field.radius = std::min(field.radius, disk);

  VectorField rotated = field;
  if (alpha != cplx(1, 0)) {
    VectorField base = field;
    rotated.chi = [alpha, base](cplx z) { return alpha * base.chi(z); };
    rotated.omega = [alpha, base](cplx z) { return base.omega(z) / alpha; };
  }

  SvgFigure fig(-disk * 1.05, disk * 1.05, -disk * 1.05, disk * 1.05);
  fig.ring(cplx(0, 0), disk, "#cccccc");
  int drawn = 0;
  Table traj_table;
  traj_table.name = "trajectories";
  traj_table.header = {"trajectory", "t", "re", "im"};
  for (int k = 0; k < n_traj; ++k) {
    double th = 2.0 * pi * k / n_traj;
    cplx z0 = 0.85 * disk * cplx{std::cos(th), std::sin(th)};
    for (double sign : {1.0, -1.0}) {
      try {
        TrajectorySpec spec(sign * alpha / std::abs(alpha), t_span, 1e-4, disk * 5e-3,
                            t_span / 4000.0);
        auto res = trajectory(rotated, z0, spec);
        fig.polyline(res.path.vertices, SvgFigure::palette(k), 1.0);
        for (size_t j = 0; j < res.path.vertices.size(); ++j)
          traj_table.add_row({std::to_string(drawn), fmt17(sign * res.times[j]),
                              fmt17(res.path.vertices[j].real()),
                              fmt17(res.path.vertices[j].imag())});
        ++drawn;
      } catch (const error&) {
        // seed on a singularity or immediately outside: skip
      }
    }
  }
  for (cplx s : field.singularities)
    if (std::abs(s) <= disk) fig.dot(s, 3.5, "#000000");
  fig.text(10, 20, "phase portrait (" + kind + ")");

  RunOutput out;
  out.experiment = "phase_portrait";
  out.report["experiment"] = "phase_portrait";
  out.report["kind"] = kind;
  out.report["disk"] = disk;
  out.report["trajectories_drawn"] = drawn;
  out.report["pass"] = true;
  out.tables.push_back(std::move(traj_table));
  out.figures.emplace_back("portrait.svg", fig.str());
  return out;
}

// ---------------------------------------------------------------------- //
//  spiral: lifted circle with its net-translation audit                   //
// ---------------------------------------------------------------------- //

inline RunOutput spiral(const Config& config) {
  const ConfigSection& g = config.global();
  const ConfigSection* ms = config.find_section("map");
  if (!ms) fail(errc::config_parse, "spiral needs a [map] section");
  AnalyticMap map = cfg::get_map(*ms);
  double r = cfg::get_double(g, "r");
  int base_vertices = cfg::get_int(g, "base_vertices", 512);
  double audit_tol = cfg::get_double(g, "audit_tolerance", 1e-6);

  BuffForm form = make_buff_form(map);
  LiftedPath lift = lift_path(form, PathPolyline::circle(cplx(0, 0), r, base_vertices),
                              cplx(0, 0));
  cplx net = lift.net_translation();
  cplx expected = 0.0;
  int enclosed = 0;
  for (const auto& rec : form.fixed_points) {
    if (std::abs(rec.location) < r) {
      expected += 2.0 * pi * iunit * residue_closed_form(rec);
      ++enclosed;
    }
  }
  double err = std::abs(net - expected);
  bool pass = err < audit_tol;

  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (cplx Z : lift.values) {
    xmin = std::min(xmin, Z.real());
    xmax = std::max(xmax, Z.real());
    ymin = std::min(ymin, Z.imag());
    ymax = std::max(ymax, Z.imag());
  }
  double padx = 0.05 * (xmax - xmin) + 1e-9, pady = 0.05 * (ymax - ymin) + 1e-9;
  SvgFigure fig(xmin - padx, xmax + padx, ymin - pady, ymax + pady);
  fig.polyline(lift.values, SvgFigure::palette(0), 1.2);
  fig.dot(lift.values.front(), 3.0, "#2ca02c");
  fig.dot(lift.values.back(), 3.0, "#d62728");
  fig.text(10, 20, "net translation " + fmt17(net.real()) + " + " + fmt17(net.imag()) + "i");
  fig.text(10, 38, "2 pi i (Lambda + q M) " + fmt17(expected.real()) + " + " +
                       fmt17(expected.imag()) + "i");

  RunOutput out;
  out.experiment = "spiral";
  out.report["experiment"] = "spiral";
  out.report["r"] = r;
  out.report["enclosed_fixed_points"] = enclosed;
  out.report["net_translation"] = json_of(net);
  out.report["expected_translation"] = json_of(expected);
  out.report["audit_error"] = err;
  out.report["audit_tolerance"] = audit_tol;
  out.report["pass"] = pass;
  out.exit_code = pass ? 0 : 2;
  out.tables.push_back(lift_table("lift", lift));
  out.figures.emplace_back("spiral.svg", fig.str());
  return out;
}

}  // namespace experiments

/// Dispatch on the config's `experiment` key.
inline RunOutput run_experiment(const Config& config, int threads = 0) {
  std::string kind = cfg::get_string(config.global(), "experiment", "");
  if (kind == "theorem_a") return experiments::theorem_a(config, threads);
  if (kind == "theorem_b") return experiments::theorem_b(config);
  if (kind == "est2") return experiments::est2(config);
  if (kind == "sum_rule") return experiments::sum_rule(config);
  if (kind == "gate") return experiments::gate(config);
  if (kind == "residue_audit") return experiments::residue_audit(config);
  if (kind == "phase_portrait") return experiments::phase_portrait(config);
  if (kind == "spiral") return experiments::spiral(config);
  fail(errc::config_parse, "unknown experiment '" + kind + "'");
}

}  // namespace buffdyn
