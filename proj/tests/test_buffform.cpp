#include <doctest.h>

#include "buffdyn/buffform.hpp"
#include "oracles.hpp"

using namespace buffdyn;

namespace {

AnalyticMap quad_map(cplx lambda, double radius = 0.5) {
  return AnalyticMap::polynomial({0.0, lambda, 1.0}, radius);
}

const double LOG2 = std::log(2.0);

}  // namespace

TEST_CASE("omega closed forms") {
  BuffForm lin = make_buff_form(AnalyticMap::polynomial({0.0, 2.0}, 4.0));
  CHECK(std::abs(omega(lin, cplx(1, 0)) - cplx(1.0 / LOG2, 0)) < 1e-14);

  BuffForm para = make_buff_form(quad_map(1.0));
  cplx z{0.1, 0};
  cplx expected = 2.0 / (0.1 * std::log(1.2));
  CHECK(std::abs(omega(para, z) - expected) < 1e-12 * std::abs(expected));
}

TEST_CASE("omega Laurent data near the parabolic point") {
  // omega - (1/z^2 + 1/z) -> -1/3 for f = z + z^2
  BuffForm para = make_buff_form(quad_map(1.0));
  cplx z{1e-3, 0};
  cplx rest = omega(para, z) - (1.0 / (z * z) + 1.0 / z);
  CHECK(std::abs(rest - cplx(-1.0 / 3, 0)) < 5e-3);
}

TEST_CASE("omega guard and positivity errors") {
  BuffForm para = make_buff_form(quad_map(1.0));
  try {
    omega(para, cplx(1e-6, 0));
    CHECK(false);
  } catch (const error& e) {
    CHECK(e.code() == errc::pole_proximity);
  }

  BuffForm steep = make_buff_form(AnalyticMap::polynomial({0.0, 1.0, 3.0}, 0.5));
  try {
    omega(steep, cplx(-0.4, 0));  // f' = 1 + 6z = -1.4, on the cut
    CHECK(false);
  } catch (const error& e) {
    CHECK(e.code() == errc::branch_cut);
  }
  try {
    omega(steep, cplx(-0.4, 0.05));  // Re f' < 0 off the cut
    CHECK(false);
  } catch (const error& e) {
    CHECK(e.code() == errc::positivity_violated);
  }
}

TEST_CASE("chi closed forms and zeros") {
  BuffForm lin = make_buff_form(AnalyticMap::polynomial({0.0, 2.0}, 4.0));
  CHECK(std::abs(chi(lin, cplx(1, 0)) - cplx(LOG2, 0)) < 1e-14);

  BuffForm para = make_buff_form(quad_map(1.0));
  CHECK(chi(para, cplx(0, 0)) == cplx(0, 0));
  cplx z{0.1, 0};
  CHECK(std::abs(chi(para, z) * omega(para, z) - 1.0) < 1e-13);
}

TEST_CASE("omega * chi = 1 wherever both are defined") {
  for (const auto& m : {quad_map(0.9, 0.4), quad_map(1.15, 0.4), quad_map(1.0, 0.4)}) {
    BuffForm form = make_buff_form(m);
    for (int k = 0; k < 60; ++k) {
      cplx z = oracle::random_in_annulus(0.01, 0.35);
      double d;
      if (detail::nearest_fixed_point(form, z, &d); d < form.pole_guard) continue;
      CHECK(std::abs(omega(form, z) * chi(form, z) - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("residue closed form") {
  BuffForm lin = make_buff_form(AnalyticMap::polynomial({0.0, 2.0}, 1.0));
  CHECK(std::abs(residue_closed_form(lin.fixed_points[0]) - cplx(1.0 / LOG2, 0)) < 1e-14);

  BuffForm para = make_buff_form(quad_map(1.0));
  CHECK(std::abs(residue_closed_form(para.fixed_points[0]) - cplx(1, 0)) < 1e-9);

  BuffForm cubic = make_buff_form(AnalyticMap::polynomial({0.0, 1.0, 1.0, 1.0}, 0.5));
  CHECK(std::abs(residue_closed_form(cubic.fixed_points[0])) < 1e-9);
}

TEST_CASE("residue quadrature oracle agrees with the closed form") {
  struct Case {
    AnalyticMap map;
    cplx p;
    double radius;
  };
  const Case cases[] = {
      {AnalyticMap::polynomial({0.0, 2.0}, 1.0), cplx(0, 0), 0.1},
      {quad_map(1.0), cplx(0, 0), 0.05},
      {quad_map(0.9), cplx(0.1, 0), 0.02},
  };
  for (const auto& c : cases) {
    BuffForm form = make_buff_form(c.map);
    const FixedPointRecord* rec = nullptr;
    for (const auto& r : form.fixed_points)
      if (std::abs(r.location - c.p) < 1e-8) rec = &r;
    REQUIRE(rec);
    CHECK(std::abs(residue_numeric(form, c.p, c.radius) - residue_closed_form(*rec)) < 1e-8);
  }
}

TEST_CASE("residue theorem over the validity disk") {
  // radius 0.35 keeps Re f' > 0 throughout for the attracting multipliers
  for (double lam : {0.85, 1.1, 1.2}) {
    BuffForm form = make_buff_form(quad_map(lam, 0.35));
    cplx sum = 0.0;
    for (const auto& r : form.fixed_points) sum += residue_closed_form(r);
    cplx loop = oracle::contour_residue(
        [&](cplx z) { return omega(form, z); }, cplx(0, 0), 0.315, 8192);
    CHECK(std::abs(sum - loop) < 1e-8);
  }
}

TEST_CASE("u_f for linear maps vanishes") {
  BuffForm lin = make_buff_form(AnalyticMap::polynomial({0.0, 2.0}, 4.0));
  for (cplx z : {cplx(1, 0), cplx(0.3, 0.2), cplx(-0.5, 0.4)}) {
    CHECK(std::abs(u_f(lin, z)) < 1e-10);
  }
}

TEST_CASE("u_f vanishes at fixed points and has the stated leading order") {
  BuffForm para = make_buff_form(quad_map(1.0));
  CHECK(u_f(para, cplx(0, 0)) == cplx(0, 0));
  // u_f(z)/z^2 -> 1/6
  for (double th : {0.0, 1.1, 2.9, 4.4}) {
    cplx z = 1e-3 * std::polar(1.0, th);
    cplx ratio = u_f(para, z) / (z * z);
    CHECK(std::abs(ratio - cplx(1.0 / 6, 0)) < 0.01 / 6);
  }
}

TEST_CASE("series and quadrature evaluations of u_f agree in the overlap") {
  BuffForm para = make_buff_form(quad_map(1.0));
  cplx z{0.05, 0.02};
  cplx by_series = u_f(para, z);  // small enough displacement: series path
  cplx w = z + displacement(para.map, z);
  cplx by_simpson = oracle::segment_integral(
                        [&](cplx s) { return omega(para, s); }, z, w) -
                    1.0;
  CHECK(std::abs(by_series - by_simpson) < 1e-10);
}

TEST_CASE("u_f_t endpoints and the linear-map closed form") {
  BuffForm lin = make_buff_form(AnalyticMap::polynomial({0.0, 2.0}, 4.0));
  cplx z{0.7, -0.3};
  CHECK(u_f_t(lin, z, 0.0) == cplx(0, 0));
  for (double t : {0.25, 0.5, 0.8, 1.0}) {
    // oracle: int over [z, (1+t) z] of 1/(s Log 2) = Log(1+t)/Log 2
    cplx expected = std::log(1.0 + t) / LOG2 - t;
    CHECK(std::abs(u_f_t(lin, z, t) - expected) < 1e-10);
  }
}

TEST_CASE("u_f_t smallness near the parabolic point") {
  // |u_{f,t}| < eps t with eps = 0.01 already at |z| = 1e-3 (leading term
  // t(1-t) Delta'/2 with |Delta'| = 2|z|)
  BuffForm para = make_buff_form(quad_map(1.0));
  for (double th : {0.3, 2.0, 5.1}) {
    cplx z = 1e-3 * std::polar(1.0, th);
    for (double t : {0.0625, 0.25, 0.5, 0.75, 1.0}) {
      CHECK(std::abs(u_f_t(para, z, t)) < 0.01 * t);
    }
  }
}

TEST_CASE("u_f reports the offending pole for guarded segments") {
  BuffForm para = make_buff_form(quad_map(1.0));
  try {
    u_f_t(para, cplx(2e-5, 0), 1.0);
    CHECK(false);
  } catch (const error& e) {
    CHECK(e.code() == errc::segment_near_pole);
    REQUIRE(e.pole().has_value());
    CHECK(std::abs(*e.pole()) < 1e-12);
  }
}

TEST_CASE("residue contour conflicts are detected") {
  BuffForm form = make_buff_form(quad_map(0.9, 0.35));
  try {
    residue_numeric(form, cplx(0, 0), 0.06);  // other fixed point at 0.1
    CHECK(false);
  } catch (const error& e) {
    CHECK(e.code() == errc::contour_conflict);
  }
}
