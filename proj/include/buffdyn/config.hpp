#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "buffdyn/germ.hpp"
#include "buffdyn/rays.hpp"

namespace buffdyn {

// ---------------------------------------------------------------------------
// Line-oriented configuration:
//
//   # comment
//   experiment = theorem_a          global keys before any section
//   radii = 0.05, 0.02, 0.01        lists are comma-separated
//   [family]                        sections group related keys
//   coefficients = 0+0i, 1+0i, 1+0i complex numbers are written re+imi
//   c = 1+0i
//
// Sections may repeat ([map] for each audited map); order is preserved.
// ---------------------------------------------------------------------------

struct ConfigSection {
  std::string name;  // empty for the global section
  std::vector<std::pair<std::string, std::string>> entries;

  const std::string* find(const std::string& key) const {
    for (const auto& [k, v] : entries)
      if (k == key) return &v;
    return nullptr;
  }
};

struct Config {
  std::vector<ConfigSection> sections;  // sections[0] is the global one

  const ConfigSection& global() const { return sections.front(); }

  const ConfigSection* find_section(const std::string& name) const {
    for (const auto& s : sections)
      if (s.name == name) return &s;
    return nullptr;
  }

  std::vector<const ConfigSection*> all_sections(const std::string& name) const {
    std::vector<const ConfigSection*> out;
    for (const auto& s : sections)
      if (s.name == name) out.push_back(&s);
    return out;
  }
};

namespace cfg {

inline std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

inline Config parse(std::istream& in) {
  Config cfg;
  cfg.sections.push_back({"", {}});
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (t.front() == '[') {
      if (t.back() != ']')
        fail(errc::config_parse, "line " + std::to_string(lineno) + ": unterminated section");
      cfg.sections.push_back({trim(t.substr(1, t.size() - 2)), {}});
      continue;
    }
    size_t eq = t.find('=');
    if (eq == std::string::npos)
      fail(errc::config_parse, "line " + std::to_string(lineno) + ": expected key = value");
    cfg.sections.back().entries.emplace_back(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
  return cfg;
}

inline Config parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(errc::io_error, "cannot open config file " + path);
  return parse(in);
}

inline Config parse_string(const std::string& text) {
  std::istringstream in(text);
  return parse(in);
}

/// Complex literal "re", "re+imi", "re-imi", "imi" (e.g. "1", "-0.5+2i", "1i").
inline cplx parse_complex(const std::string& text) {
  std::string s = trim(text);
  if (s.empty()) fail(errc::config_parse, "empty complex literal");
  double re = 0.0, im = 0.0;
  size_t pos = 0;
  auto read_number = [&](double& out) {
    size_t consumed = 0;
    try {
      out = std::stod(s.substr(pos), &consumed);
    } catch (const std::exception&) {
      fail(errc::config_parse, "bad complex literal '" + text + "'");
    }
    pos += consumed;
  };
  double first;
  read_number(first);
  if (pos < s.size() && s[pos] == 'i') {
    ++pos;
    im = first;
  } else {
    re = first;
    if (pos < s.size()) {
      double second;
      read_number(second);
      if (pos >= s.size() || s[pos] != 'i')
        fail(errc::config_parse, "bad complex literal '" + text + "'");
      ++pos;
      im = second;
    }
  }
  if (pos != s.size()) fail(errc::config_parse, "trailing junk in complex literal '" + text + "'");
  return {re, im};
}

inline std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(text);
  while (std::getline(in, cur, ',')) {
    std::string t = trim(cur);
    if (!t.empty()) out.push_back(t);
  }
  return out;
}

inline const std::string& require(const ConfigSection& s, const std::string& key) {
  const std::string* v = s.find(key);
  if (!v) {
    std::string where = s.name.empty() ? "global section" : "[" + s.name + "]";
    fail(errc::config_parse, "missing key '" + key + "' in " + where);
  }
  return *v;
}

inline std::string get_string(const ConfigSection& s, const std::string& key,
                              const std::string& fallback) {
  const std::string* v = s.find(key);
  return v ? *v : fallback;
}

inline double get_double(const ConfigSection& s, const std::string& key) {
  try {
    return std::stod(require(s, key));
  } catch (const error&) {
    throw;
  } catch (const std::exception&) {
    fail(errc::config_parse, "key '" + key + "' is not a number");
  }
}

inline double get_double(const ConfigSection& s, const std::string& key, double fallback) {
  return s.find(key) ? get_double(s, key) : fallback;
}

inline int get_int(const ConfigSection& s, const std::string& key) {
  double d = get_double(s, key);
  int i = int(std::lround(d));
  if (std::abs(d - i) > 1e-9) fail(errc::config_parse, "key '" + key + "' is not an integer");
  return i;
}

inline int get_int(const ConfigSection& s, const std::string& key, int fallback) {
  return s.find(key) ? get_int(s, key) : fallback;
}

inline cplx get_complex(const ConfigSection& s, const std::string& key) {
  return parse_complex(require(s, key));
}

inline cplx get_complex(const ConfigSection& s, const std::string& key, cplx fallback) {
  return s.find(key) ? get_complex(s, key) : fallback;
}

inline std::vector<cplx> get_complex_list(const ConfigSection& s, const std::string& key) {
  std::vector<cplx> out;
  for (const auto& item : split_list(require(s, key))) out.push_back(parse_complex(item));
  return out;
}

inline std::vector<double> get_double_list(const ConfigSection& s, const std::string& key) {
  std::vector<double> out;
  for (const auto& item : split_list(require(s, key))) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      fail(errc::config_parse, "list '" + key + "' has a non-numeric entry");
    }
  }
  return out;
}

/// Angle "p/q" in turns (also accepts a bare integer p, meaning p/1).
inline RayAngle get_angle(const ConfigSection& s, const std::string& key) {
  std::string t = trim(require(s, key));
  size_t slash = t.find('/');
  try {
    if (slash == std::string::npos) return RayAngle(std::stoll(t), 1);
    return RayAngle(std::stoll(t.substr(0, slash)), std::stoll(t.substr(slash + 1)));
  } catch (const std::exception&) {
    fail(errc::config_parse, "bad angle '" + t + "' (want p/q in turns)");
  }
}

/// A map section: coefficients (ascending), power (default 1), radius.
inline AnalyticMap get_map(const ConfigSection& s) {
  AnalyticMap base =
      AnalyticMap::polynomial(get_complex_list(s, "coefficients"), get_double(s, "radius"));
  int power = get_int(s, "power", 1);
  return power == 1 ? base : AnalyticMap::iterate(base, power);
}

/// A multiplier-schedule family: member n multiplies the template's linear
/// coefficient by exp(c/n).
struct FamilySpec {
  std::vector<cplx> coefficients;
  cplx c{1.0, 0.0};
  int n_start = 8;
  int n_end = 64;
  int power = 1;
  double radius = 0.5;

  AnalyticMap member(int n) const {
    std::vector<cplx> coef = coefficients;
    if (coef.size() < 2) fail(errc::config_parse, "family template needs a linear coefficient");
    coef[1] *= std::exp(c / double(n));
    AnalyticMap base = AnalyticMap::polynomial(coef, radius);
    return power == 1 ? base : AnalyticMap::iterate(base, power);
  }

  AnalyticMap limit() const {
    AnalyticMap base = AnalyticMap::polynomial(coefficients, radius);
    return power == 1 ? base : AnalyticMap::iterate(base, power);
  }

  std::vector<AnalyticMap> members() const {
    std::vector<AnalyticMap> out;
    for (int n = n_start; n <= n_end; ++n) out.push_back(member(n));
    return out;
  }
};

inline FamilySpec get_family(const Config& config) {
  const ConfigSection* s = config.find_section("family");
  if (!s) fail(errc::config_parse, "missing [family] section");
  FamilySpec fam;
  fam.coefficients = get_complex_list(*s, "coefficients");
  fam.c = get_complex(*s, "c", cplx(1, 0));
  fam.n_start = get_int(*s, "n_start", 8);
  fam.n_end = get_int(*s, "n_end", 64);
  fam.power = get_int(*s, "power", 1);
  fam.radius = get_double(*s, "radius");
  if (fam.n_start < 1 || fam.n_end < fam.n_start)
    fail(errc::config_parse, "family range must satisfy 1 <= n_start <= n_end");
  return fam;
}

}  // namespace cfg
}  // namespace buffdyn
