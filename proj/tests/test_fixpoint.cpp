#include <doctest.h>

#include "buffdyn/fixpoint.hpp"
#include "oracles.hpp"

using namespace buffdyn;

namespace {

AnalyticMap quad_map(cplx lambda, double radius = 0.5) {
  return AnalyticMap::polynomial({0.0, lambda, 1.0}, radius);
}

AnalyticMap odd_iterate(double a, double radius = 0.6) {
  AnalyticMap g = AnalyticMap::polynomial({0.0, -a, 0.0, 1.0}, radius);
  return AnalyticMap::iterate(g, 2);
}

const FixedPointRecord* at(const std::vector<FixedPointRecord>& recs, cplx p) {
  for (const auto& r : recs)
    if (std::abs(r.location - p) < 1e-7) return &r;
  return nullptr;
}

}  // namespace

TEST_CASE("find_fixed_points on quadratics") {
  auto recs = find_fixed_points(quad_map(1.1), 0.5);
  REQUIRE(recs.size() == 2);
  const auto* zero = at(recs, 0.0);
  const auto* other = at(recs, cplx(-0.1, 0));
  REQUIRE(zero);
  REQUIRE(other);
  CHECK(std::abs(zero->multiplier - cplx(1.1, 0)) < 1e-10);
  CHECK(zero->multiplicity == 1);
  CHECK(std::abs(other->multiplier - cplx(0.9, 0)) < 1e-10);
  CHECK(other->multiplicity == 1);
}

TEST_CASE("find_fixed_points detects multiplicity") {
  auto recs = find_fixed_points(quad_map(1.0), 0.5);
  REQUIRE(recs.size() == 1);
  CHECK(std::abs(recs[0].location) < 1e-10);
  CHECK(std::abs(recs[0].multiplier - 1.0) < 1e-10);
  CHECK(recs[0].multiplicity == 2);

  auto triple = find_fixed_points(odd_iterate(1.0), 0.5);
  REQUIRE(triple.size() == 1);
  CHECK(triple[0].multiplicity == 3);
  CHECK(std::abs(triple[0].multiplier - 1.0) < 1e-10);
}

TEST_CASE("holomorphic index") {
  AnalyticMap doubling = AnalyticMap::polynomial({0.0, 2.0}, 1.0);
  CHECK(std::abs(holomorphic_index(doubling, 0.0) - cplx(-1, 0)) < 1e-12);

  // index 0 for z + z^2, confirmed by an independent contour oracle
  AnalyticMap para = quad_map(1.0);
  cplx iota = holomorphic_index(para, 0.0);
  cplx by_contour = oracle::contour_residue(
      [&](cplx z) { return 1.0 / (z - (z + z * z)); }, cplx(0, 0), 1e-2);
  CHECK(std::abs(iota - by_contour) < 1e-9);
  CHECK(std::abs(iota) < 1e-9);

  AnalyticMap cubic = AnalyticMap::polynomial({0.0, 1.0, 1.0, 1.0}, 0.5);
  CHECK(std::abs(holomorphic_index(cubic, 0.0) - cplx(1, 0)) < 1e-9);
}

TEST_CASE("resit") {
  AnalyticMap doubling = AnalyticMap::polynomial({0.0, 2.0}, 1.0);
  CHECK(std::abs(resit(doubling, 0.0) - cplx(1.5, 0)) < 1e-12);
  CHECK(std::abs(resit(quad_map(1.0), 0.0) - cplx(1, 0)) < 1e-9);
  AnalyticMap cubic = AnalyticMap::polynomial({0.0, 1.0, 1.0, 1.0}, 0.5);
  CHECK(std::abs(resit(cubic, 0.0)) < 1e-9);
}

TEST_CASE("resit + index = 1/2 at simple fixed points") {
  for (double lam : {0.8, 0.9, 1.05, 1.2, 1.25}) {
    for (const auto& rec : find_fixed_points(quad_map(lam), 0.5)) {
      REQUIRE(rec.multiplicity == 1);
      CHECK(std::abs(rec.resit + rec.index - cplx(0.5, 0)) < 1e-10);
    }
  }
}

TEST_CASE("multiplier_param") {
  CHECK(std::abs(multiplier_param(cplx(std::exp(1.0), 0), 1) - cplx(1, 0)) < 1e-14);
  CHECK(std::abs(multiplier_param(std::exp(cplx(0.1, 0.2)), 1) - cplx(2, -4)) < 1e-12);
  for (int n : {2, 7, 31}) {
    CHECK(std::abs(multiplier_param(cplx(std::exp(1.0 / n), 0), 1) - cplx(n, 0)) < 1e-9 * n);
  }
  CHECK_THROWS_AS(multiplier_param(cplx(1, 0), 1), error);
  CHECK_THROWS_AS(multiplier_param(cplx(-2, 0), 1), error);
}

TEST_CASE("classify_approach") {
  auto family = [](auto gen) {
    std::vector<cplx> v;
    for (int n = 1; n <= 32; ++n) v.push_back(gen(n));
    return v;
  };
  CHECK(classify_approach(family([](int n) { return std::exp(cplx(1.0 / n, 0)); }), 1, 10) ==
        approach::non_tangential);
  CHECK(classify_approach(
            family([](int n) { return std::exp(cplx(1, 0) / cplx(n, double(n) * n)); }), 1,
            10) == approach::tangential);
  CHECK(classify_approach(family([](int n) { return std::exp(cplx(1.0 / n, 1.0 / n)); }), 1,
                          10) == approach::non_tangential);
  CHECK_THROWS_AS(classify_approach({cplx(1.1, 0)}, 1, 10), error);
}

TEST_CASE("classify_approach is non-tangential for every fixed admissible c") {
  for (cplx c : {cplx(1, 0), cplx(1, 1), cplx(0.5, -3), cplx(2, 8), cplx(-1, 2)}) {
    if (std::abs(c.imag() / c.real()) > 10) continue;
    std::vector<cplx> lams;
    for (int n = 1; n <= 32; ++n) lams.push_back(std::exp(c / double(n)));
    CHECK(classify_approach(lams, 1, 10) == approach::non_tangential);
  }
}

TEST_CASE("bifurcation_data on solvable quadratics") {
  AnalyticMap limit = quad_map(1.0);
  {
    auto data = bifurcation_data(limit, quad_map(0.9), 1, 0.5);
    CHECK(std::abs(data.origin.location) < 1e-10);
    CHECK(std::abs(data.origin.multiplier - cplx(0.9, 0)) < 1e-10);
    REQUIRE(data.cycle.size() == 1);
    CHECK(std::abs(data.cycle[0].location - cplx(0.1, 0)) < 1e-10);
    CHECK(std::abs(data.cycle[0].multiplier - cplx(1.1, 0)) < 1e-10);
    CHECK(std::abs(data.delta - cplx(0.1, 0)) < 1e-10);
    CHECK(std::abs(data.cycle[0].location / data.delta - 1.0) < 1e-9);
    CHECK(std::abs(data.rho - cplx(1, 0)) < 1e-9);
  }
  {
    auto data = bifurcation_data(limit, quad_map(1.05), 1, 0.5);
    REQUIRE(data.cycle.size() == 1);
    CHECK(std::abs(data.cycle[0].location - cplx(-0.05, 0)) < 1e-10);
    CHECK(std::abs(data.cycle[0].multiplier - cplx(0.95, 0)) < 1e-10);
    CHECK(std::abs(data.delta - cplx(-0.05, 0)) < 1e-10);
  }
  CHECK_THROWS_AS(bifurcation_data(limit, quad_map(1.0), 1, 0.5), error);
}

TEST_CASE("bifurcation_data against the root-finder oracle, q = 2") {
  double a = std::exp(1.0 / 50);
  AnalyticMap limit = odd_iterate(1.0);
  AnalyticMap pert = odd_iterate(a);
  auto data = bifurcation_data(limit, pert, 2, 0.6);
  REQUIRE(data.cycle.size() == 2);

  oracle::poly g{{0.0, -a, 0.0, 1.0}};
  oracle::poly disp = oracle::sub(oracle::self_compose(g, 2), oracle::poly{{0.0, 1.0}});
  std::vector<cplx> small_roots;
  for (cplx r : oracle::durand_kerner(disp))
    if (std::abs(r) > 1e-6 && std::abs(r) < 0.55) small_roots.push_back(r);
  REQUIRE(small_roots.size() == 2);
  for (const auto& rec : data.cycle) {
    double best = 1e9;
    for (cplx r : small_roots) best = std::min(best, std::abs(rec.location - r));
    CHECK(best < 1e-9);
  }
  // est2 with the leading coefficient factored in: a_n p^q / delta -> 1.
  // (The raw p^q/delta tends to 1/a for this family, whose limit iterate is
  // z - 2z^3 + ...; the oracle roots confirm the corrected ratio.)
  CHECK(std::abs(data.leading_coefficient - cplx(-a * (1 + a * a), 0)) < 1e-9);
  CHECK(std::abs(data.cycle_ratio(0) - 1.0) < 0.1);
  CHECK(std::abs(data.cycle_ratio(1) - 1.0) < 0.1);
}

TEST_CASE("index sum is continuous under perturbation") {
  AnalyticMap limit = odd_iterate(1.0);
  cplx iota_limit = holomorphic_index(limit, 0.0);
  CHECK(std::abs(iota_limit - cplx(0.75, 0)) < 1e-9);  // b/a^2 = 3/4 for z - 2z^3 + 3z^5 ...
  double prev = 1e9;
  for (int n : {8, 16, 32, 64}) {
    auto recs = find_fixed_points(odd_iterate(std::exp(1.0 / n)), 0.6);
    cplx sum = 0.0;
    for (const auto& r : recs) sum += r.index;
    double dev = std::abs(sum - iota_limit);
    CHECK(dev < prev + 1e-12);
    prev = dev;
  }
  CHECK(prev < 1e-2);
}

TEST_CASE("sector_label") {
  SectorSpec a1(1, 0.2, SectorSpec::kind::repelling_A);
  CHECK(sector_label(cplx(0.1, 0), a1) == 1);

  SectorSpec a2(2, 0.2, SectorSpec::kind::repelling_A);
  CHECK(!sector_label(cplx(0, 0.1), a2).has_value());

  SectorSpec b2(2, 0.2, SectorSpec::kind::attracting_B);
  CHECK(sector_label(cplx(0, 0.1), b2) == 1);
}

TEST_CASE("sum_rule_check") {
  AnalyticMap limit = quad_map(1.0);
  auto data = bifurcation_data(limit, quad_map(0.9), 1, 0.5);
  double dev = sum_rule_check(data);
  double by_hand = std::abs(1.0 / std::log(0.9) + 1.0 / std::log(1.1) - 1.0);
  CHECK(dev == doctest::Approx(by_hand).epsilon(1e-9));
  CHECK(dev < 0.01);
}

TEST_CASE("sum rule deviation decays along exp(1/n) family") {
  AnalyticMap limit = quad_map(1.0);
  for (int n : {8, 16, 32, 64}) {
    auto data = bifurcation_data(limit, quad_map(std::exp(1.0 / n)), 1, 0.5);
    CHECK(sum_rule_check(data) < 2.0 / n);
  }
}

TEST_CASE("boundary roots are rejected") {
  // f = 1.1 z + z^2 has its second fixed point at -0.1 exactly
  AnalyticMap m = AnalyticMap::polynomial({0.0, 1.1, 1.0}, 0.5);
  try {
    find_fixed_points(m, 0.1);
    CHECK(false);
  } catch (const error& e) {
    CHECK(e.code() == errc::boundary_root);
  }
}

TEST_CASE("bifurcated cycle points each sit in one sector") {
  // family with limit iterate in the z + z^{q+1} + ... frame, so the sector
  // axes are the maps' own attracting/repelling directions: g = -a z - z^3/2
  // gives 1 - lambda_n^2 < 0 (origin repelling, cycle attracting): the cycle
  // sits on the attracting axes +-i, one point per attracting sector.
  auto family_member = [](double a) {
    AnalyticMap g = AnalyticMap::polynomial({0.0, -a, 0.0, -0.5}, 0.6);
    return AnalyticMap::iterate(g, 2);
  };
  AnalyticMap limit = family_member(1.0);
  for (int n : {16, 32, 64}) {
    auto data = bifurcation_data(limit, family_member(std::exp(1.0 / n)), 2, 0.6);
    CHECK(std::abs(data.origin.multiplier) > 1.0);   // origin repelling
    CHECK(std::abs(data.cycle[0].multiplier) < 1.0); // cycle attracting
    SectorSpec spec(2, 0.2, SectorSpec::kind::attracting_B);
    std::vector<int> labels;
    for (const auto& rec : data.cycle) {
      auto j = sector_label(rec.location, spec);
      REQUIRE(j.has_value());
      labels.push_back(*j);
    }
    CHECK(labels[0] != labels[1]);
  }
}

TEST_CASE("located cycle points are fixed to 1e-9") {
  AnalyticMap limit = odd_iterate(1.0);
  for (int n : {8, 32, 64}) {
    AnalyticMap pert = odd_iterate(std::exp(1.0 / n));
    auto data = bifurcation_data(limit, pert, 2, 0.6);
    CHECK(std::abs(evaluate(pert, data.origin.location) - data.origin.location) < 1e-9);
    for (const auto& rec : data.cycle)
      CHECK(std::abs(evaluate(pert, rec.location) - rec.location) < 1e-9);
  }
}

TEST_CASE("bifurcation_data rejects a wrong fixed-point count") {
  // radius too small to contain the cycle point 0.1
  AnalyticMap limit = quad_map(1.0);
  try {
    bifurcation_data(limit, quad_map(0.9), 1, 0.05);
    CHECK(false);
  } catch (const error& e) {
    CHECK(e.code() == errc::wrong_count);
  }
}
