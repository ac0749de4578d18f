#include <doctest.h>

#include "buffdyn/rectify.hpp"
#include "oracles.hpp"

using namespace buffdyn;

namespace {

AnalyticMap quad_map(cplx lambda, double radius = 0.5) {
  return AnalyticMap::polynomial({0.0, lambda, 1.0}, radius);
}

const double LOG2 = std::log(2.0);

}  // namespace

TEST_CASE("integrate_path closed forms for f = 2z") {
  BuffForm lin = make_buff_form(AnalyticMap::polynomial({0.0, 2.0}, 4.0));
  // antiderivative Log z / Log 2 over [1,2]
  cplx val = integrate_path(lin, PathPolyline::segment(cplx(1, 0), cplx(2, 0)));
  CHECK(std::abs(val - cplx(1, 0)) < 1e-10);

  // closed square around 0: residue theorem
  PathPolyline square({{1, -1}, {1, 1}, {-1, 1}, {-1, -1}, {1, -1}});
  cplx loop = integrate_path(lin, square);
  CHECK(std::abs(loop - 2.0 * pi * iunit / LOG2) < 1e-9);

  CHECK(integrate_path(lin, PathPolyline::segment(cplx(1, 0), cplx(1, 0))) == cplx(0, 0));
}

TEST_CASE("integrate_path refuses guarded paths") {
  BuffForm para = make_buff_form(quad_map(1.0));
  try {
    integrate_path(para, PathPolyline::segment(cplx(-0.2, 0), cplx(0.2, 0)));
    CHECK(false);
  } catch (const error& e) {
    CHECK(e.code() == errc::path_near_pole);
    CHECK(e.pole().has_value());
  }
}

TEST_CASE("lift_path: circle under a linear map is a vertical segment") {
  BuffForm lin = make_buff_form(AnalyticMap::polynomial({0.0, 2.0}, 4.0));
  LiftedPath lift = lift_path(lin, PathPolyline::circle(cplx(0, 0), 1.0, 256), cplx(0, 0));
  CHECK(std::abs(lift.net_translation() - 2.0 * pi * iunit / LOG2) < 1e-9);
  // phi = Log z / Log 2 maps the circle to a vertical line
  for (cplx Z : lift.values) CHECK(std::abs(Z.real()) < 1e-6);

  LiftedPath point = lift_path(lin, PathPolyline::segment(cplx(1, 0), cplx(1, 0)), cplx(5, 1));
  CHECK(point.values.size() == 1);
  CHECK(point.values[0] == cplx(5, 1));
}

TEST_CASE("lift_path: parabolic circle is a clockwise near-circle with translation 2 pi i rho") {
  BuffForm para = make_buff_form(quad_map(1.0));
  LiftedPath lift = lift_path(para, PathPolyline::circle(cplx(0, 0), 0.1, 256), cplx(-10, 0));
  CHECK(std::abs(lift.net_translation() - 2.0 * pi * iunit) < 1e-8);
  // clockwise: the winding of Z around the curve's centroid is negative
  double turning = 0.0;
  for (size_t k = 1; k + 1 < lift.values.size(); ++k) {
    cplx a = lift.values[k] - lift.values[k - 1];
    cplx b = lift.values[k + 1] - lift.values[k];
    turning += std::arg(b / a);
  }
  CHECK(turning < -5.0);  // roughly -2 pi
}

TEST_CASE("lift steps are capped and match segment integrals") {
  BuffForm para = make_buff_form(quad_map(0.9));
  LiftedPath lift = lift_path(para, PathPolyline::circle(cplx(0, 0), 0.3, 64), cplx(0, 0));
  for (size_t k = 1; k < lift.values.size(); ++k) {
    cplx dz = lift.values[k] - lift.values[k - 1];
    CHECK(std::abs(dz) <= 0.1 + 1e-9);
    cplx direct = integrate_path(
        para, PathPolyline::segment(lift.base.vertices[k - 1], lift.base.vertices[k]));
    CHECK(std::abs(dz - direct) < 1e-9);
  }
}

TEST_CASE("branch consistency: null-homotopic loops return to the start") {
  BuffForm form = make_buff_form(quad_map(1.1));
  // a rectangle avoiding both fixed points (0 and -0.1)
  PathPolyline rect({{0.2, 0.05}, {0.35, 0.05}, {0.35, 0.3}, {0.2, 0.3}, {0.2, 0.05}});
  LiftedPath lift = lift_path(form, rect, cplx(0, 0));
  CHECK(std::abs(lift.net_translation()) < 1e-9);
}

TEST_CASE("monodromy equals the loop-lift translation") {
  struct Case {
    AnalyticMap map;
    cplx p;
    cplx expected;
  };
  const Case cases[] = {
      {AnalyticMap::polynomial({0.0, 2.0}, 1.0), cplx(0, 0), 2.0 * pi * iunit / LOG2},
      {quad_map(1.0), cplx(0, 0), 2.0 * pi * iunit},
      {AnalyticMap::polynomial({0.0, 1.0, 1.0, 1.0}, 0.5), cplx(0, 0), cplx(0, 0)},
  };
  for (const auto& c : cases) {
    BuffForm form = make_buff_form(c.map);
    CHECK(std::abs(monodromy(form, c.p) - c.expected) < 1e-9);
    double r = 0.35 * form.map.validity_radius();
    LiftedPath lift = lift_path(form, PathPolyline::circle(c.p, r, 128), cplx(0, 0));
    CHECK(std::abs(lift.net_translation() - monodromy(form, c.p)) < 1e-9);
  }
}

TEST_CASE("finite differences of a lift recover omega") {
  BuffForm form = make_buff_form(quad_map(1.1));
  for (int trial = 0; trial < 10; ++trial) {
    cplx a = oracle::random_in_annulus(0.2, 0.4);
    cplx b = oracle::random_in_annulus(0.2, 0.4);
    if (std::abs(a - b) < 1e-3) continue;
    if (dist_point_segment(cplx(0, 0), a, b) < 0.08) continue;
    if (dist_point_segment(cplx(-0.1, 0), a, b) < 0.08) continue;
    // refine by hand: split [a,b] into short chords and compare dZ/dz to omega
    int steps = 4000;
    cplx prev_val = 0.0;
    for (int k = 1; k <= steps; ++k) {
      cplx z0 = a + (b - a) * (double(k - 1) / steps);
      cplx z1 = a + (b - a) * (double(k) / steps);
      cplx dz = integrate_path(form, PathPolyline::segment(z0, z1));
      cplx fd = dz / (z1 - z0);
      cplx om = omega(form, 0.5 * (z0 + z1));
      CHECK(std::abs(fd - om) <= 1e-6 * std::max(1.0, std::abs(om)));
      prev_val = fd;
    }
    (void)prev_val;
  }
}

TEST_CASE("lifted_step and its inverse") {
  BuffForm lin = make_buff_form(AnalyticMap::polynomial({0.0, 2.0}, 4.0));
  auto [z1, Z1] = lifted_step(lin, cplx(0.01, 0), cplx(0, 0));
  CHECK(std::abs(z1 - cplx(0.02, 0)) < 1e-15);
  CHECK(std::abs(Z1 - cplx(1, 0)) < 1e-10);

  auto [z0, Z0] = lifted_step_inverse(lin, cplx(0.02, 0), cplx(1, 0), cplx(0.01, 0));
  CHECK(std::abs(z0 - cplx(0.01, 0)) < 1e-12);
  CHECK(std::abs(Z0) < 1e-10);

  BuffForm para = make_buff_form(quad_map(1.0));
  CHECK_THROWS_AS(lifted_step(para, cplx(0, 0), cplx(0, 0)), error);
}

TEST_CASE("lifted_step round trip on random points") {
  BuffForm form = make_buff_form(quad_map(1.05));
  for (int k = 0; k < 25; ++k) {
    cplx z = oracle::random_in_annulus(0.05, 0.3);
    cplx Z = oracle::random_in_annulus(0.0, 2.0);
    try {
      auto [zn, Zn] = lifted_step(form, z, Z);
      auto [zb, Zb] = lifted_step_inverse(form, zn, Zn, z);
      CHECK(std::abs(zb - z) < 1e-9);
      CHECK(std::abs(Zb - Z) < 1e-9);
    } catch (const error& e) {
      CHECK((e.code() == errc::segment_near_pole || e.code() == errc::path_near_pole));
    }
  }
}

TEST_CASE("cone membership") {
  ConeSpec plus(cplx(0, 0), 0.5, ConeSpec::half::plus);
  CHECK(cone_contains(plus, cplx(1, 0.4)));
  CHECK(!cone_contains(plus, cplx(1, 0.7)));
  ConeSpec minus(cplx(0, 0), 0.5, ConeSpec::half::minus);
  CHECK(cone_contains(minus, cplx(-1, 0)));
  CHECK_THROWS_AS(ConeSpec(cplx(0, 0), 1.5, ConeSpec::half::plus), error);
}

TEST_CASE("cone chaining along an F-orbit") {
  BuffForm para = make_buff_form(quad_map(1.0));
  cplx z = -0.04;
  cplx Z{0, 0};
  ConeSpec cone(Z, 0.25, ConeSpec::half::plus);
  for (int k = 0; k < 20; ++k) {
    auto [zn, Zn] = lifted_step(para, z, Z);
    z = zn;
    Z = Zn;
    CHECK(cone_contains(cone, Z));
  }
}

TEST_CASE("verify_theorem_a on the quadratic family") {
  AnalyticMap limit = quad_map(1.0);
  std::vector<AnalyticMap> family;
  for (int n = 8; n <= 40; ++n) family.push_back(quad_map(std::exp(1.0 / n)));
  TheoremAGrid grid{12, 6};
  auto report = verify_theorem_a(limit, family, 1, 0.25, {0.05, 0.02}, grid, 8);
  CHECK(report.pass);
  CHECK(report.radius_found > 0.0);
  CHECK(report.family_index_start >= 0);
  CHECK(report.max_ratio < 0.25);

  CHECK_THROWS_AS(verify_theorem_a(limit, family, 1, 1.5, {0.05}, grid, 8), error);
}

TEST_CASE("linear-map lift deviation closed form") {
  // for f = lambda z the exact deviation is |Log(1+t(lambda-1))/Log lambda - t|
  double lam = std::exp(1.0 / 16);
  BuffForm lin = make_buff_form(AnalyticMap::polynomial({0.0, lam}, 1.0));
  cplx z{0.3, 0.1};
  for (double t : {0.25, 0.5, 1.0}) {
    cplx expected = std::log(1.0 + t * (lam - 1.0)) / std::log(cplx(lam, 0)) - t;
    CHECK(std::abs(u_f_t(lin, z, t) - expected) < 1e-10);
    CHECK(std::abs(expected) / t < 0.05);  // small for lambda near 1
  }
}

TEST_CASE("the sweep is independent of the thread count") {
  AnalyticMap limit = quad_map(1.0);
  std::vector<AnalyticMap> family;
  for (int n = 16; n <= 28; ++n) family.push_back(quad_map(std::exp(1.0 / n)));
  TheoremAGrid grid{8, 4};
  auto one = verify_theorem_a(limit, family, 1, 0.25, {0.03}, grid, 6, 1);
  auto two = verify_theorem_a(limit, family, 1, 0.25, {0.03}, grid, 6, 2);
  CHECK(one.pass == two.pass);
  CHECK(one.max_ratio == two.max_ratio);
  CHECK(one.family_index_start == two.family_index_start);
  REQUIRE(one.forward_by_index.size() == two.forward_by_index.size());
  for (size_t k = 0; k < one.forward_by_index.size(); ++k) {
    CHECK(one.forward_by_index[k] == two.forward_by_index[k]);
    CHECK(one.backward_by_index[k] == two.backward_by_index[k]);
  }
}

TEST_CASE("verify_theorem_a rejects an empty family") {
  AnalyticMap limit = quad_map(1.0);
  try {
    verify_theorem_a(limit, {}, 1, 0.25, {0.05});
    CHECK(false);
  } catch (const error& e) {
    CHECK(e.code() == errc::family_too_short);
  }
}
