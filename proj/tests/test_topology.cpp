#include "doctest.h"

#include <memory>

#include "cgdist/farey.hpp"
#include "cgdist/topology.hpp"

using namespace cgdist;

namespace {

CurveClass torus(std::int64_t p, std::int64_t q) { return CurveClass::from_slope(make_slope(p, q)); }

// h = (1 2 3 4), v = (1 2 4 3), 0-based.
std::shared_ptr<const SquareComplex> genus_two() {
  return std::make_shared<const SquareComplex>(std::vector<int>{1, 2, 3, 0}, std::vector<int>{1, 3, 0, 2});
}

CurveClass genus_two_core(const std::shared_ptr<const SquareComplex>& complex, Slope dir, int start = 0) {
  return CurveClass::core(complex, {2, 2}, dir, trace_closed_line(*complex, dir, start));
}

Segment seg(int square, Rational x0, Rational y0, Rational x1, Rational y1) {
  return {square, {x0, y0}, {x1, y1}};
}

}  // namespace

TEST_CASE("slopes are canonicalised and must be primitive") {
  CHECK(make_slope(-2, -3) == Slope{2, 3});
  CHECK(make_slope(-1, 0) == Slope{1, 0});
  CHECK_THROWS_AS(make_slope(2, 4), std::domain_error);
  CHECK_THROWS_AS(make_slope(0, 0), std::domain_error);
  CHECK(slope_angle_less({1, 0}, {0, 1}));
  CHECK_FALSE(slope_angle_less({0, 1}, {1, 0}));
}

TEST_CASE("torus intersection numbers") {
  CHECK(geometric_intersection(torus(1, 0), torus(0, 1)) == 1);
  CHECK(geometric_intersection(torus(0, 1), torus(5, 8)) == 5);
  CHECK(geometric_intersection(torus(5, 8), torus(5, 8)) == 0);

  // Segment-crossing count against the determinant, both orders.
  const auto slopes = slopes_up_to_height(7);
  for (const auto& a : slopes) {
    for (const auto& b : slopes) {
      const auto ab = drawn_crossings(CurveClass::from_slope(a), CurveClass::from_slope(b));
      if (a == b) continue;
      REQUIRE(ab == slope_det(a, b));
    }
  }
}

TEST_CASE("traced cores close up and count periods") {
  const auto complex = genus_two();
  const auto xi = genus_two_core(complex, {1, 0});
  const auto zeta = genus_two_core(complex, {0, 1});
  CHECK(xi.periods() == 4);
  CHECK(zeta.periods() == 4);
  CHECK(geometric_intersection(xi, zeta) == 4);
  CHECK(is_essential(xi));
  CHECK(is_essential(zeta));
  CHECK(fills(xi, zeta));
  CHECK(fills(zeta, xi));
  CHECK(distance_geq3(xi, zeta));
  CHECK_FALSE(distance_geq3(xi, xi));
  CHECK_THROWS_AS(fills(xi, xi), std::invalid_argument);
}

TEST_CASE("complement of a single core on the torus is an annulus") {
  const auto c = torus(1, 0);
  const CurveClass* one[] = {&c};
  const auto faces = complement_faces(*unit_torus_complex(), one);
  REQUIRE(faces.size() == 1);
  CHECK(faces[0].euler == 0);
  CHECK(faces[0].marked == 1);
  CHECK(faces[0].boundary_sides == 2);
}

TEST_CASE("a loop around the puncture is inessential") {
  const Rational q1(1, 4), q3(3, 4);
  std::vector<Segment> loop = {seg(0, q1, 0, 0, q1), seg(0, 1, q1, q3, 0), seg(0, q3, 1, 1, q3),
                               seg(0, 0, q3, q1, 1)};
  const auto c = CurveClass::combinatorial(unit_torus_complex(), {1, 1}, loop);
  CHECK_FALSE(is_essential(c));
  CHECK(drawn_crossings(c, torus(1, 0)) == 0);
}

TEST_CASE("fills is unsupported on complexity one") {
  CHECK_THROWS_AS(fills(torus(1, 0), torus(0, 1)), std::domain_error);
}

TEST_CASE("farey distance examples") {
  CHECK(farey_distance({0, 1}, {1, 2}) == 1);
  CHECK(farey_distance({0, 1}, {2, 5}) == 2);
  CHECK(farey_distance({0, 1}, {5, 8}) == 3);
  CHECK(farey_distance({5, 8}, {0, 1}) == 3);
  CHECK(farey_distance({3, 7}, {3, 7}) == 0);
  CHECK(farey_distance_bfs({0, 1}, {2, 5}, 8, 10) == 2);
  CHECK(farey_distance_bfs({0, 1}, {5, 8}, 8, 10) == 3);
  CHECK_THROWS_AS(farey_distance({2, 4}, {1, 0}), std::domain_error);
  CHECK(farey_self_test(12));
}

TEST_CASE("distance_geq3 on the torus dispatches to the Farey graph") {
  CHECK(distance_geq3(torus(0, 1), torus(5, 8)));
  CHECK_FALSE(distance_geq3(torus(0, 1), torus(2, 5)));
  CHECK_FALSE(distance_geq3(torus(0, 1), torus(0, 1)));
}

TEST_CASE("annular twist proxy") {
  CHECK(annular_twist_bound(torus(1, 0), torus(0, 1), torus(1, 1)) == 1);
  CHECK(annular_twist_bound(torus(1, 0), torus(0, 1), torus(0, 1)) == 0);
  CHECK_THROWS_AS(annular_twist_bound(torus(1, 0), torus(1, 0), torus(0, 1)), std::domain_error);
}
