#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <tuple>

#include "cgdist/flat_surface.hpp"

using namespace cgdist;

namespace {

std::shared_ptr<const Origami> make(int n, const Cycles& h, const Cycles& v) {
  return std::make_shared<const Origami>(build_origami(n, h, v));
}

std::shared_ptr<const Origami> genus_two() { return make(4, {{1, 2, 3, 4}}, {{1, 2, 4, 3}}); }
std::shared_ptr<const Origami> unit() { return make(1, {{1}}, {{1}}); }

Cycles random_cycle(int n, std::mt19937_64& rng) {
  std::vector<int> labels(static_cast<std::size_t>(n));
  std::iota(labels.begin(), labels.end(), 1);
  std::shuffle(labels.begin() + 1, labels.end(), rng);
  return {labels};
}

// Independent walk of the segment from a corner with holonomy (p, q), q >= 0:
// merges the sorted crossing parameters of vertical lines (k/|p|) and
// horizontal lines (j/q) and steps across each crossing. Returns false if the
// segment meets a lattice point before its end.
struct Walk {
  bool clean = false;
  int start = 0;
  int end = 0;
};

Walk walk_segment(const SquareComplex& c, int s, std::int64_t p, std::int64_t q) {
  Walk w;
  const std::int64_t ap = std::llabs(p);
  // events at parameter k/ap (vertical) and j/q (horizontal), compared by cross-multiplication
  std::int64_t k = 1, j = 1;
  int square = s;
  if (p == 0) {  // climbs the right edge of s
    w.start = c.corner_vertex(c.right(s));
    for (std::int64_t i = 0; i < q - 1; ++i) square = c.up(square);
    w.clean = q == 1;
    w.end = c.corner_vertex(c.right(c.up(square)));
    return w;
  }
  if (q == 0) {
    w.start = c.corner_vertex(s);
    for (std::int64_t i = 0; i < ap - 1; ++i) square = c.right(square);
    w.clean = ap == 1;
    w.end = c.corner_vertex(c.right(square));
    return w;
  }
  w.start = p > 0 ? c.corner_vertex(s) : c.corner_vertex(c.right(s));
  while (k <= ap && j <= q) {
    const std::int64_t lhs = k * q, rhs = j * ap;
    if (lhs == rhs) {
      w.clean = k == ap && j == q;
      w.end = p > 0 ? c.corner_vertex(c.right(c.up(square))) : c.corner_vertex(c.up(square));
      return w;
    }
    if (lhs < rhs) {
      square = p > 0 ? c.right(square) : c.left(square);
      ++k;
    } else {
      square = c.up(square);
      ++j;
    }
  }
  return w;
}

}  // namespace

TEST_CASE("build_origami examples and errors") {
  const auto torus = unit();
  CHECK(torus->genus() == 1);
  CHECK(torus->surface() == SurfaceSig{1, 1});
  CHECK(torus->surface().complexity() == 1);

  const auto g2 = genus_two();
  CHECK(g2->genus() == 2);
  CHECK(g2->surface().punctures == 2);
  auto cones = g2->cone_points();
  REQUIRE(cones.size() == 2);
  std::vector<int> angles = {cones[0].angle_multiple, cones[1].angle_multiple};
  std::sort(angles.begin(), angles.end());
  CHECK(angles == std::vector<int>{1, 3});

  const auto kind_of = [](int n, const Cycles& h, const Cycles& v) {
    try {
      build_origami(n, h, v);
    } catch (const OrigamiError& e) {
      return static_cast<int>(e.kind());
    }
    return -1;
  };
  CHECK(kind_of(2, {{1, 2}}, {{1}, {2}}) == static_cast<int>(OrigamiErrorKind::not_one_cylinder));
  CHECK(kind_of(2, {{1}, {2}}, {{1}, {2}}) == static_cast<int>(OrigamiErrorKind::not_transitive));
  CHECK(kind_of(2, {{1, 3}}, {{1, 2}}) == static_cast<int>(OrigamiErrorKind::not_a_permutation));
  CHECK(kind_of(2, {{1, 1}}, {{1, 2}}) == static_cast<int>(OrigamiErrorKind::not_a_permutation));
  CHECK(g2->h_cycles() == Cycles{{1, 2, 3, 4}});
  CHECK(g2->v_cycles() == Cycles{{1, 2, 4, 3}});
}

TEST_CASE("Euler identity and one-cylinder invariant on random origamis") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 50);
    const auto o = make(n, random_cycle(n, rng), random_cycle(n, rng));
    CHECK(o->vertex_count() - n == 2 - 2 * o->genus());
    if (n <= 12 && !o->lattice_model()) {
      const FlowPoint pt{o, 0.3};
      CHECK(cylinders_in_direction(pt, {1, 0}).size() == 1);
      CHECK(cylinders_in_direction(pt, {0, 1}).size() == 1);
      const auto [xi, zeta] = core_curves(*o);
      CHECK(geometric_intersection(xi, zeta) == n);
      CHECK(pt.normalized_area() == Rational(1));
    }
  }
}

TEST_CASE("core curves and flat lengths") {
  const auto [a, b] = core_curves(*unit());
  CHECK(a.slope() == Slope{1, 0});
  CHECK(b.slope() == Slope{0, 1});

  const auto g2 = genus_two();
  const auto [xi, zeta] = core_curves(*g2);
  CHECK(geometric_intersection(xi, zeta) == 4);
  std::vector<int> order;
  for (const auto& s : xi.segments()) order.push_back(s.square + 1);
  CHECK(order == std::vector<int>{1, 2, 3, 4});

  CHECK(flat_length(xi, {g2, 0.0}).value(0) == doctest::Approx(2.0));
  for (double t : {-1.5, 0.0, 0.7, 2.0}) {
    const FlowPoint pt{unit(), t};
    CHECK(flat_length(CurveClass::from_slope({1, 0}), pt).value(t) == doctest::Approx(std::exp(t)));
    // horizontal scaling law: the form is (A, 0) independent of t
    const auto form = flat_length(xi, {g2, t});
    CHECK(form.b == 0);
    CHECK(form.value(t) == doctest::Approx(std::exp(t) * form.value(0)));
  }
  CHECK(flat_length(CurveClass::from_slope({1, 1}), {unit(), 0.0}).value(0) == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("length comparison is exact") {
  const LengthForm x{1, 1, 1}, y{2, 0, 1};
  CHECK(compare_lengths(x, y, 0.0) == 0);
  CHECK(compare_lengths(x, y, 1e-9) < 0);  // 2 e^{2t} grows faster
  CHECK(compare_lengths(x, y, -1e-9) > 0);
  CHECK(compare_lengths({4, 0, 4}, {1, 0, 1}, 0.25) == 0);
  const LengthForm big{static_cast<__int128>(1) << 80, 1, 3};
  CHECK(compare_lengths(big, big, 5.0) == 0);
}

TEST_CASE("saddle connections") {
  const auto torus = unit();
  CHECK(enumerate_saddle_connections({torus, 0.0}, 1.0).size() == 2);
  CHECK(enumerate_saddle_connections({torus, 0.0}, 0.5).empty());
  int lattice = 0;
  for (int p = -3; p <= 3; ++p) {
    for (int q = 0; q <= 3; ++q) {
      if ((q > 0 || p > 0) && std::gcd(p, q) == 1 && p * p + q * q <= 6.25) ++lattice;
    }
  }
  CHECK(static_cast<int>(enumerate_saddle_connections({torus, 0.0}, 2.5).size()) == lattice);

  // Regime with every vertex marked: compare against the independent walk.
  std::mt19937_64 rng(11);
  std::vector<std::shared_ptr<const Origami>> surfaces = {genus_two()};
  while (surfaces.size() < 6) {
    const int n = 3 + static_cast<int>(rng() % 2);
    auto o = make(n, random_cycle(n, rng), random_cycle(n, rng));
    if (!o->lattice_model()) surfaces.push_back(o);
  }
  for (const auto& o : surfaces) {
    for (double t : {0.0, 0.4, -0.8}) {
      for (double len : {1.0, 2.0, 3.0}) {
        const FlowPoint pt{o, t};
        std::multiset<std::tuple<int, int, std::int64_t, std::int64_t>> expected, got;
        const double reach = len * std::sqrt(o->size()) * std::exp(std::fabs(t)) + 1;
        for (std::int64_t p = -static_cast<std::int64_t>(reach); p <= reach; ++p) {
          for (std::int64_t q = 0; q <= reach; ++q) {
            if (q == 0 && p <= 0) continue;
            const long double l2 = (p * p * std::exp(2 * t) + q * q * std::exp(-2 * t)) / o->size();
            if (l2 > len * len) continue;
            for (int s = 0; s < o->size(); ++s) {
              const auto w = walk_segment(*o->complex(), s, p, q);
              if (w.clean) expected.insert({w.start, w.end, p, q});
            }
          }
        }
        for (const auto& sc : enumerate_saddle_connections(pt, len)) {
          got.insert({sc.start_vertex, sc.end_vertex, sc.hol_x, sc.hol_y});
        }
        CHECK(got == expected);
      }
    }
  }
}

TEST_CASE("cylinders and extremal length") {
  for (double t : {-1.0, 0.0, 0.5}) {
    const auto cyls = cylinders_in_direction({unit(), t}, {1, 0});
    REQUIRE(cyls.size() == 1);
    CHECK(cyls[0].circumference_at() == doctest::Approx(std::exp(t)));
    CHECK(cyls[0].height() == doctest::Approx(std::exp(-t)));
    CHECK(cyls[0].modulus() == doctest::Approx(std::exp(-2 * t)));
  }
  const auto g2 = genus_two();
  for (const Slope d : {Slope{1, 0}, Slope{0, 1}}) {
    const auto cyls = cylinders_in_direction({g2, 0.0}, d);
    REQUIRE(cyls.size() == 1);
    CHECK(cyls[0].circumference_at() == doctest::Approx(2.0));
    CHECK(cyls[0].height() == doctest::Approx(0.5));
    CHECK(cyls[0].modulus() == doctest::Approx(0.25));
  }
  // areas of each decomposition sum to one
  for (const Slope d : {Slope{1, 1}, Slope{-1, 2}, Slope{2, 3}}) {
    Rational total(0);
    for (const auto& c : cylinders_in_direction({g2, 0.2}, d)) total = total + c.area;
    CHECK(total == Rational(1));
  }

  auto e = extremal_length_bounds(CurveClass::from_slope({1, 0}), {unit(), 0.0});
  CHECK(e.lower == doctest::Approx(1.0));
  CHECK(e.upper == doctest::Approx(1.0));
  e = extremal_length_bounds(CurveClass::from_slope({0, 1}), {unit(), 1.0});
  CHECK(e.lower == doctest::Approx(std::exp(-2.0)));
  CHECK(e.upper == doctest::Approx(std::exp(-2.0)));
  for (const Slope s : {Slope{1, 0}, Slope{3, 2}, Slope{-5, 7}}) {
    for (double t : {-2.0, 0.0, 1.3}) {
      const auto b = extremal_length_bounds(CurveClass::from_slope(s), {unit(), t});
      CHECK(b.lower == doctest::Approx(b.upper));
    }
  }
  for (const auto& c : candidate_cylinders({g2, 0.6})) {
    const auto b = extremal_length_bounds(c.core, {g2, 0.6});
    CHECK(b.lower <= b.upper);
    CHECK(expanding_annulus_modulus(c.core, {g2, 0.6}, Side::left) == 0);
  }
  CHECK(expanding_annulus_modulus(CurveClass::from_slope({1, 0}), {unit(), 0.0}, Side::right) == 0);
}

TEST_CASE("systole") {
  auto s = systole_estimate({unit(), 0.0});
  CHECK(s.value == doctest::Approx(1.0));
  CHECK(s.witness.slope() == Slope{1, 0});
  s = systole_estimate({unit(), 2.0});
  CHECK(s.witness.slope() == Slope{0, 1});
  CHECK(s.value == doctest::Approx(std::exp(-4.0)));
  CHECK(s.lower <= s.value);

  const auto g2 = genus_two();
  for (double t : {-2.0, 0.0, 1.0, 3.0}) {
    const FlowPoint pt{g2, t};
    const auto est = systole_estimate(pt);
    CHECK(est.lower <= est.value);
    // no cylinder in a wider search beats the estimate
    for (const auto& c : candidate_cylinders(pt, 6.0)) CHECK(extremal_length_bounds(c.core, pt).upper >= est.value * (1 - 1e-12));
  }
}

TEST_CASE("torus pair surfaces") {
  const Slope xi{3, 5}, zeta{-2, 7};
  const auto o = std::make_shared<const Origami>(torus_pair_origami(xi, zeta));
  const std::int64_t k = 3 * 7 + 2 * 5;
  CHECK(o->size() == k);
  CHECK(o->surface() == SurfaceSig{1, 1});
  const auto [hx, hy] = o->periods().apply(xi.p, xi.q);
  CHECK(static_cast<std::int64_t>(hx) == k);
  CHECK(static_cast<std::int64_t>(hy) == 0);
  const auto [vx, vy] = o->periods().apply(zeta.p, zeta.q);
  CHECK(static_cast<std::int64_t>(vx) == 0);
  CHECK(std::llabs(static_cast<std::int64_t>(vy)) == k);
  const auto [a, b] = core_curves(*o);
  CHECK(a.slope() == xi);
  CHECK(b.slope() == zeta);
  CHECK(flat_length(a, {o, 0.0}).value(0) == doctest::Approx(std::sqrt(static_cast<double>(k))));
  // The materialized gluing is a k-square torus with horizontal and vertical
  // single cycles, i.e. a one-cylinder origami.
  const auto rebuilt = build_origami(static_cast<int>(k), o->h_cycles(), o->v_cycles());
  CHECK(rebuilt.genus() == 1);
  CHECK(rebuilt.vertex_count() == k);
}

TEST_CASE("thin-thick decomposition") {
  const auto g2 = genus_two();
  const double eps0 = 0.25 * 0.25 / 4;
  auto tt = thin_thick({g2, 0.0}, 0.01, eps0);
  CHECK(tt.short_curves.empty());
  REQUIRE(tt.components.size() == 1);
  CHECK(tt.components[0].whole_surface);
  CHECK_THROWS_AS(thin_thick({g2, 0.0}, 0.0, eps0), std::domain_error);
  CHECK_THROWS_AS(thin_thick({g2, 0.0}, 2 * eps0, eps0), std::domain_error);

  const auto [xi, zeta] = core_curves(*g2);
  tt = thin_thick({g2, 4.0}, 0.01, eps0);
  CHECK(std::find(tt.short_curves.begin(), tt.short_curves.end(), zeta) != tt.short_curves.end());
  int sides = 0;
  for (const auto& c : tt.components) sides += c.boundary_sides;
  CHECK(sides == 2 * static_cast<int>(tt.short_curves.size()));

  for (double t : {3.0, 4.0, -4.0}) {
    const auto big = thin_thick({g2, t}, eps0, eps0);
    const auto small = thin_thick({g2, t}, eps0 / 10, eps0);
    for (const auto& c : small.short_curves) {
      CHECK(std::find(big.short_curves.begin(), big.short_curves.end(), c) != big.short_curves.end());
    }
    for (std::size_t i = 0; i < big.short_curves.size(); ++i) {
      for (std::size_t j = i + 1; j < big.short_curves.size(); ++j) {
        CHECK(geometric_intersection(big.short_curves[i], big.short_curves[j]) == 0);
      }
    }
    for (int i = 0; i < static_cast<int>(big.components.size()); ++i) {
      const auto& comp = big.components[i];
      if (comp.pants || comp.whole_surface) {
        CHECK_THROWS_AS(is_M_large(big, i, {g2, t}, 1.0), std::domain_error);
      } else {
        CHECK(is_M_large(big, i, {g2, t}, 0.0));
        CHECK_FALSE(is_M_large(big, i, {g2, t}, 1.0));
      }
    }
  }

  const auto torus = thin_thick({unit(), 3.0}, 0.01, 0.01);
  REQUIRE(torus.short_curves.size() == 1);
  CHECK(torus.short_curves[0].slope() == Slope{0, 1});
  REQUIRE(torus.components.size() == 1);
  CHECK(torus.components[0].pants);
}

TEST_CASE("slimness") {
  const auto c = CurveClass::from_slope({1, 0});
  CHECK(is_slim(c, {unit(), 0.0}, 2.0));
  CHECK_FALSE(is_slim(c, {unit(), 0.0}, 0.5));
  CHECK_THROWS_AS(is_slim(c, {unit(), 0.0}, 0.0), std::domain_error);
}
