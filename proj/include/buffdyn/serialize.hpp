#pragma once

#include <cstdio>
#include <string>
#include <vector>

#include <json.hpp>

#include "buffdyn/fixpoint.hpp"
#include "buffdyn/path.hpp"
#include "buffdyn/rays.hpp"
#include "buffdyn/rectify.hpp"

namespace buffdyn {

using ordered_json = nlohmann::ordered_json;

/// 17 significant digits: round-trip exact for doubles, byte-deterministic.
inline std::string fmt17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline ordered_json json_of(cplx z) { return ordered_json::array({z.real(), z.imag()}); }

inline ordered_json json_of(const FixedPointRecord& r) {
  ordered_json j;
  j["location"] = json_of(r.location);
  j["multiplier"] = json_of(r.multiplier);
  j["multiplicity"] = r.multiplicity;
  j["index"] = json_of(r.index);
  j["resit"] = json_of(r.resit);
  if (r.big_lambda) j["big_lambda"] = json_of(*r.big_lambda);
  return j;
}

inline ordered_json json_of(const TheoremAReport& r) {
  ordered_json j;
  j["epsilon"] = r.epsilon;
  j["radius_found"] = r.radius_found;
  j["family_index_start"] = r.family_index_start;
  j["grid_size"] = r.grid_size;
  j["t_samples"] = r.t_samples;
  j["max_ratio"] = r.max_ratio;
  j["pass"] = r.pass;
  return j;
}

inline const char* ray_status_name(RayTail::stop s) {
  switch (s) {
    case RayTail::stop::reached_t_min: return "reached_t_min";
    case RayTail::stop::landed: return "landed";
    case RayTail::stop::newton_failed: return "newton_failed";
  }
  return "unknown";
}

inline ordered_json json_of(const RayTail& r) {
  ordered_json j;
  j["angle"] = std::to_string(r.angle.num) + "/" + std::to_string(r.angle.den);
  j["degree"] = r.degree;
  j["period"] = r.period;
  j["dt"] = r.dt;
  j["samples"] = r.z.size();
  j["t_deepest"] = r.t.empty() ? 0.0 : r.t.back();
  j["potential_floor"] = r.potential_floor;
  j["status"] = ray_status_name(r.status);
  if (r.landing) j["landing"] = json_of(*r.landing);
  return j;
}

/// A CSV table: RFC-4180, CRLF line endings, mandatory header.
struct Table {
  std::string name;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> cells) { rows.push_back(std::move(cells)); }

  std::string to_csv() const {
    std::string out;
    auto emit = [&](const std::vector<std::string>& cells) {
      for (size_t k = 0; k < cells.size(); ++k) {
        if (k) out += ',';
        out += cells[k];
      }
      out += "\r\n";
    };
    emit(header);
    for (const auto& row : rows) emit(row);
    return out;
  }
};

inline Table ray_table(const std::string& name, const RayTail& ray) {
  Table t;
  t.name = name;
  t.header = {"t", "re", "im"};
  for (size_t k = 0; k < ray.z.size(); ++k)
    t.add_row({fmt17(ray.t[k]), fmt17(ray.z[k].real()), fmt17(ray.z[k].imag())});
  return t;
}

inline Table trajectory_table(const std::string& name, const std::vector<double>& times,
                              const PathPolyline& path) {
  Table t;
  t.name = name;
  t.header = {"t", "re", "im"};
  for (size_t k = 0; k < path.vertices.size(); ++k)
    t.add_row({fmt17(times[k]), fmt17(path.vertices[k].real()),
               fmt17(path.vertices[k].imag())});
  return t;
}

inline Table lift_table(const std::string& name, const LiftedPath& lift) {
  Table t;
  t.name = name;
  t.header = {"t_index", "base_re", "base_im", "Z_re", "Z_im"};
  for (size_t k = 0; k < lift.values.size(); ++k)
    t.add_row({std::to_string(k), fmt17(lift.base.vertices[k].real()),
               fmt17(lift.base.vertices[k].imag()), fmt17(lift.values[k].real()),
               fmt17(lift.values[k].imag())});
  return t;
}

}  // namespace buffdyn
