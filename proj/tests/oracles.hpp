// Test-only oracles, independent of the library code paths they check:
// exact polynomial algebra, Durand-Kerner roots, and plain composite
// quadrature for contour/segment integrals.
#pragma once

#include <cmath>
#include <complex>
#include <random>
#include <vector>

namespace oracle {

using cplx = std::complex<double>;
constexpr double opi = 3.14159265358979323846;

struct poly {
  std::vector<cplx> c;  // ascending powers

  cplx eval(cplx z) const {
    cplx r = 0.0;
    for (size_t k = c.size(); k-- > 0;) r = r * z + c[k];
    return r;
  }

  poly derivative() const {
    if (c.size() <= 1) return poly{{0.0}};
    poly d;
    d.c.resize(c.size() - 1);
    for (size_t k = 1; k < c.size(); ++k) d.c[k - 1] = double(k) * c[k];
    return d;
  }
};

inline poly mul(const poly& a, const poly& b) {
  poly r;
  r.c.assign(a.c.size() + b.c.size() - 1, cplx(0.0));
  for (size_t i = 0; i < a.c.size(); ++i)
    for (size_t j = 0; j < b.c.size(); ++j) r.c[i + j] += a.c[i] * b.c[j];
  return r;
}

inline poly sub(const poly& a, const poly& b) {
  poly r = a;
  if (b.c.size() > r.c.size()) r.c.resize(b.c.size(), cplx(0.0));
  for (size_t k = 0; k < b.c.size(); ++k) r.c[k] -= b.c[k];
  return r;
}

/// outer(inner(z)) by exact coefficient arithmetic.
inline poly compose(const poly& outer, const poly& inner) {
  poly r{{cplx(0.0)}};
  for (size_t k = outer.c.size(); k-- > 0;) {
    r = mul(r, inner);
    if (r.c.empty()) r.c.push_back(cplx(0.0));
    r.c[0] += outer.c[k];
  }
  return r;
}

inline poly self_compose(const poly& p, int times) {
  poly r{{cplx(0.0), cplx(1.0)}};  // identity
  for (int j = 0; j < times; ++j) r = compose(p, r);
  return r;
}

/// All roots by Durand-Kerner.
inline std::vector<cplx> durand_kerner(poly p, int iters = 400) {
  while (p.c.size() > 1 && std::abs(p.c.back()) == 0.0) p.c.pop_back();
  int n = int(p.c.size()) - 1;
  cplx lead = p.c.back();
  for (auto& a : p.c) a /= lead;
  std::vector<cplx> roots(n);
  cplx seed{0.4, 0.9};
  cplx pw = 1.0;
  for (int k = 0; k < n; ++k) {
    pw *= seed;
    roots[k] = pw;
  }
  for (int it = 0; it < iters; ++it) {
    double moved = 0.0;
    for (int k = 0; k < n; ++k) {
      cplx den = 1.0;
      for (int j = 0; j < n; ++j)
        if (j != k) den *= roots[k] - roots[j];
      cplx delta = p.eval(roots[k]) / den;
      roots[k] -= delta;
      moved = std::max(moved, std::abs(delta));
    }
    if (moved < 1e-14) break;
  }
  return roots;
}

/// (1/2 pi i) contour integral on |z-c| = r, plain trapezoid at fixed N.
template <class F>
cplx contour_residue(F&& f, cplx center, double r, int nodes = 4096) {
  cplx sum = 0.0;
  for (int j = 0; j < nodes; ++j) {
    double th = 2.0 * opi * j / nodes;
    cplx e{std::cos(th), std::sin(th)};
    sum += f(center + r * e) * e;
  }
  return sum * r / double(nodes);
}

/// Segment integral by composite Simpson at fixed resolution.
template <class F>
cplx segment_integral(F&& f, cplx a, cplx b, int panels = 20000) {
  cplx h = (b - a) / double(2 * panels);
  cplx sum = f(a) + f(b);
  for (int k = 1; k < 2 * panels; ++k) sum += f(a + double(k) * h) * (k % 2 ? 4.0 : 2.0);
  return sum * h / 3.0;
}

inline std::mt19937& rng() {
  static std::mt19937 gen(20240817u);
  return gen;
}

inline cplx random_in_annulus(double r_lo, double r_hi) {
  std::uniform_real_distribution<double> ur(r_lo, r_hi), ua(0.0, 2.0 * opi);
  double r = ur(rng()), a = ua(rng());
  return {r * std::cos(a), r * std::sin(a)};
}

}  // namespace oracle
