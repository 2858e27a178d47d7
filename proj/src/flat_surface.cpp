#include "cgdist/flat_surface.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>

#include <boost/multiprecision/cpp_bin_float.hpp>

namespace cgdist {

namespace {

std::vector<int> cycles_to_perm(int n, const Cycles& cycles, const char* name) {
  std::vector<int> perm(static_cast<std::size_t>(n), -1);
  for (const auto& cycle : cycles) {
    for (std::size_t i = 0; i < cycle.size(); ++i) {
      const int from = cycle[i];
      const int to = cycle[(i + 1) % cycle.size()];
      if (from < 1 || from > n) {
        throw OrigamiError(OrigamiErrorKind::not_a_permutation,
                           std::string(name) + ": label " + std::to_string(from) + " outside 1.." + std::to_string(n));
      }
      if (perm[from - 1] != -1) {
        throw OrigamiError(OrigamiErrorKind::not_a_permutation,
                           std::string(name) + ": label " + std::to_string(from) + " repeated");
      }
      perm[from - 1] = to - 1;
    }
  }
  for (int i = 0; i < n; ++i) {
    if (perm[i] == -1) perm[i] = i;  // omitted labels are fixed points
  }
  return perm;
}

Cycles perm_to_cycles(const std::vector<int>& perm) {
  if (perm.empty()) throw std::logic_error("gluing permutations are not materialized for this surface");
  Cycles out;
  std::vector<bool> seen(perm.size(), false);
  for (std::size_t s = 0; s < perm.size(); ++s) {
    if (seen[s]) continue;
    std::vector<int> cycle;
    for (int x = static_cast<int>(s); !seen[x]; x = perm[x]) {
      seen[x] = true;
      cycle.push_back(x + 1);
    }
    out.push_back(std::move(cycle));
  }
  return out;
}

bool single_cycle(const std::vector<int>& perm) {
  int length = 0;
  int x = 0;
  do {
    x = perm[x];
    ++length;
  } while (x != 0);
  return length == static_cast<int>(perm.size());
}

std::int64_t ext_gcd(std::int64_t a, std::int64_t b, std::int64_t& x, std::int64_t& y) {
  if (b == 0) {
    x = a >= 0 ? 1 : -1;
    y = 0;
    return std::llabs(a);
  }
  std::int64_t x1 = 0, y1 = 0;
  const std::int64_t g = ext_gcd(b, a % b, x1, y1);
  x = y1;
  y = x1 - (a / b) * y1;
  return g;
}

std::int64_t mod(__int128 a, std::int64_t m) {
  __int128 r = a % m;
  if (r < 0) r += m;
  return static_cast<std::int64_t>(r);
}

long double ld(__int128 x) { return static_cast<long double>(x); }

}  // namespace

// ---------------------------------------------------------------------------
// Origami

Cycles Origami::h_cycles() const { return perm_to_cycles(right_); }
Cycles Origami::v_cycles() const { return perm_to_cycles(up_); }

std::vector<ConePoint> Origami::cone_points() const {
  if (lattice_model_) return {{0, 1}};
  std::vector<ConePoint> out;
  for (int v = 0; v < complex_->vertex_count(); ++v) {
    if (complex_->marked(v)) out.push_back({v, complex_->vertex_multiplicity(v)});
  }
  return out;
}

Origami build_origami(int n, const Cycles& h, const Cycles& v) {
  if (n < 1) throw OrigamiError(OrigamiErrorKind::not_a_permutation, "origami needs at least one square");
  Origami o;
  o.n_ = n;
  o.right_ = cycles_to_perm(n, h, "h");
  o.up_ = cycles_to_perm(n, v, "v");

  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  std::vector<int> stack = {0};
  seen[0] = true;
  int reached = 1;
  while (!stack.empty()) {
    const int s = stack.back();
    stack.pop_back();
    for (int next : {o.right_[s], o.up_[s]}) {
      if (!seen[next]) {
        seen[next] = true;
        ++reached;
        stack.push_back(next);
      }
    }
  }
  if (reached != n) throw OrigamiError(OrigamiErrorKind::not_transitive, "h and v do not act transitively");
  if (!single_cycle(o.right_) || !single_cycle(o.up_)) {
    throw OrigamiError(OrigamiErrorKind::not_one_cylinder, "h and v must each be a single n-cycle");
  }

  auto complex = std::make_shared<const SquareComplex>(o.right_, o.up_);
  o.vertex_count_ = complex->vertex_count();
  const int euler = o.vertex_count_ - n;
  o.surface_ = {(2 - euler) / 2, o.vertex_count_};
  if (o.surface_.complexity() == 1) {
    o.lattice_model_ = true;
    o.complex_ = unit_torus_complex();
  } else {
    o.complex_ = std::move(complex);
  }
  return o;
}

Origami torus_pair_origami(const Slope& xi_in, const Slope& zeta_in) {
  const Slope xi = make_slope(xi_in.p, xi_in.q);
  Slope zeta = make_slope(zeta_in.p, zeta_in.q);
  std::int64_t det = xi.p * zeta.q - xi.q * zeta.p;
  if (det == 0) throw std::domain_error("torus_pair_origami: slopes coincide");
  if (det > std::numeric_limits<int>::max() || -det > std::numeric_limits<int>::max()) {
    throw std::overflow_error("torus_pair_origami: too many squares");
  }
  Slope zeta_vec = zeta;
  if (det < 0) {
    zeta_vec = {-zeta.p, -zeta.q};
    det = -det;
  }
  const std::int64_t k = det;

  Origami o;
  o.n_ = static_cast<int>(k);
  o.lattice_model_ = true;
  o.complex_ = unit_torus_complex();
  o.surface_ = {1, 1};
  o.vertex_count_ = static_cast<int>(k);
  // adj [xi zeta] sends xi to (k,0) and zeta to (0,k).
  o.periods_ = {zeta_vec.q, -zeta_vec.p, -xi.q, xi.p};
  o.xi_ = xi;
  o.zeta_ = zeta;

  if (k <= Origami::max_materialized_squares) {
    // Square i is the coset of (i,0) in Z^2 / M Z^2; (0,1) is the coset of (s,0).
    std::int64_t u = 0, w = 0;
    ext_gcd(xi.p, xi.q, u, w);  // u*xi.p + w*xi.q = 1
    const std::int64_t s = mod(static_cast<__int128>(u) * zeta_vec.p + static_cast<__int128>(w) * zeta_vec.q, k);
    if (mod(static_cast<__int128>(-s) * xi.p + zeta_vec.p, k) != 0 ||
        mod(static_cast<__int128>(-s) * xi.q + zeta_vec.q, k) != 0) {
      throw std::logic_error("torus_pair_origami: inconsistent vertical shift");
    }
    o.right_.resize(static_cast<std::size_t>(k));
    o.up_.resize(static_cast<std::size_t>(k));
    for (std::int64_t i = 0; i < k; ++i) {
      o.right_[i] = static_cast<int>((i + 1) % k);
      o.up_[i] = static_cast<int>((i + s) % k);
    }
  }
  return o;
}

// ---------------------------------------------------------------------------
// Length forms

long double LengthForm::squared(double t) const {
  const long double e = std::exp(2.0L * static_cast<long double>(t));
  return (ld(a) * e + ld(b) / e) / static_cast<long double>(n);
}

long double LengthForm::value(double t) const { return std::sqrt(squared(t)); }

namespace {

using Big = boost::multiprecision::cpp_bin_float_50;

Big big(__int128 x) {
  const bool neg = x < 0;
  unsigned __int128 u = neg ? static_cast<unsigned __int128>(-x) : static_cast<unsigned __int128>(x);
  const Big hi = Big(static_cast<std::uint64_t>(u >> 64)) * boost::multiprecision::ldexp(Big(1), 64);
  const Big out = hi + Big(static_cast<std::uint64_t>(u));
  return neg ? -out : out;
}

int sign_of(__int128 x) { return (x > 0) - (x < 0); }

}  // namespace

int compare_lengths(const LengthForm& x, const LengthForm& y, double t) {
  const __int128 p = x.a * y.n - y.a * x.n;  // coefficient of e^{2t}
  const __int128 q = x.b * y.n - y.b * x.n;  // coefficient of e^{-2t}
  if (p == 0 && q == 0) return 0;
  if (t == 0.0) return sign_of(p + q);
  if (sign_of(p) * sign_of(q) >= 0) return sign_of(p) != 0 ? sign_of(p) : sign_of(q);
  // Sign of p e^{4t} + q; never zero for t != 0 since e^{4t} is then irrational.
  const long double e4 = std::exp(4.0L * static_cast<long double>(t));
  const long double v = ld(p) * e4 + ld(q);
  const long double err = (std::fabs(ld(p) * e4) + std::fabs(ld(q))) * 1e-16L;
  if (std::fabs(v) > err) return v > 0 ? 1 : -1;
  const Big exact = big(p) * boost::multiprecision::exp(Big(4) * Big(t)) + big(q);
  return exact > 0 ? 1 : (exact < 0 ? -1 : 0);
}

double FlowPoint::scale() const { return 1.0 / std::sqrt(static_cast<double>(origami->size())); }

Rational FlowPoint::normalized_area() const {
  // n squares of area e^t * e^-t = 1, times scale^2 = 1/n.
  const std::int64_t n = origami->size();
  return Rational(n) * Rational(1, n);
}

long double FlatCylinder::height() const { return area.to_long_double() / circumference_at(); }

long double FlatCylinder::modulus() const { return height() / circumference_at(); }

// ---------------------------------------------------------------------------
// Directions

namespace {

struct Vec {
  std::int64_t x = 0;
  std::int64_t y = 0;
};

struct Deformed {
  long double x;
  long double y;
};

Deformed deform(const FlowPoint& point, const Vec& v) {
  const auto& o = *point.origami;
  __int128 wx = v.x, wy = v.y;
  if (o.lattice_model()) std::tie(wx, wy) = o.periods().apply(v.x, v.y);
  const long double e = std::exp(static_cast<long double>(point.t));
  return {ld(wx) * e, ld(wy) / e};
}

long double raw_norm(const FlowPoint& point, const Vec& v) {
  const auto d = deform(point, v);
  return d.x * d.x + d.y * d.y;
}

long double raw_dot(const FlowPoint& point, const Vec& u, const Vec& v) {
  const auto a = deform(point, u);
  const auto b = deform(point, v);
  return a.x * b.x + a.y * b.y;
}

// Lagrange-reduced basis of the direction lattice under the deformed metric.
std::pair<Vec, Vec> reduced_basis(const FlowPoint& point) {
  Vec b1{1, 0}, b2{0, 1};
  for (int iteration = 0; iteration < 10000; ++iteration) {
    if (raw_norm(point, b1) > raw_norm(point, b2)) std::swap(b1, b2);
    const long double mu = std::nearbyint(raw_dot(point, b1, b2) / raw_norm(point, b1));
    if (mu == 0) return {b1, b2};
    if (std::fabs(mu) > 1e15L) throw std::overflow_error("direction lattice reduction overflow");
    const auto m = static_cast<std::int64_t>(mu);
    b2 = {b2.x - m * b1.x, b2.y - m * b1.y};
  }
  throw std::logic_error("direction lattice reduction did not converge");
}

}  // namespace

LengthForm direction_form(const FlowPoint& point, const Slope& direction) {
  const auto& o = *point.origami;
  __int128 wx = direction.p, wy = direction.q;
  if (o.lattice_model()) std::tie(wx, wy) = o.periods().apply(direction.p, direction.q);
  return {wx * wx, wy * wy, o.size()};
}

std::vector<Slope> short_directions(const FlowPoint& point, long double bound_sq) {
  if (!(bound_sq > 0)) return {};
  auto [b1, b2] = reduced_basis(point);
  if (raw_norm(point, b1) > raw_norm(point, b2)) std::swap(b1, b2);
  const long double q1 = raw_norm(point, b1);
  const long double q2 = raw_norm(point, b2);
  const long double b = raw_dot(point, b1, b2);
  const long double gap = q2 - b * b / q1;
  const long double limit = bound_sq * static_cast<long double>(point.origami->size()) * (1 + 1e-9L);

  const auto ymax = static_cast<std::int64_t>(std::floor(std::sqrt(limit / gap))) + 1;
  if (ymax > 20'000'000) throw std::length_error("short_directions: bound too large");
  std::set<std::pair<std::int64_t, std::int64_t>> found;
  std::vector<Slope> out;
  for (std::int64_t y = -ymax; y <= ymax; ++y) {
    const long double center = -static_cast<long double>(y) * b / q1;
    const long double slack = limit - static_cast<long double>(y) * static_cast<long double>(y) * gap;
    const long double radius = std::sqrt(std::max(0.0L, slack / q1));
    const auto lo = static_cast<std::int64_t>(std::floor(center - radius)) - 1;
    const auto hi = static_cast<std::int64_t>(std::ceil(center + radius)) + 1;
    for (std::int64_t x = lo; x <= hi; ++x) {
      if (std::gcd(x, y) != 1) continue;
      const Vec v{x * b1.x + y * b2.x, x * b1.y + y * b2.y};
      const Slope s = make_slope(v.x, v.y);
      if (found.count({s.p, s.q})) continue;
      if (direction_form(point, s).squared(point.t) > bound_sq * (1 + 1e-12L)) continue;
      found.insert({s.p, s.q});
      out.push_back(s);
    }
  }
  std::sort(out.begin(), out.end(), slope_angle_less);
  return out;
}

Slope shortest_direction(const FlowPoint& point) {
  const auto [b1, b2] = reduced_basis(point);
  const long double best = std::min(raw_norm(point, b1), raw_norm(point, b2));
  const auto dirs = short_directions(point, best / point.origami->size() * (1 + 1e-9L));
  if (dirs.empty()) throw std::logic_error("shortest_direction: reduction produced no vector");
  Slope winner = dirs.front();
  for (const auto& d : dirs) {
    if (compare_lengths(direction_form(point, d), direction_form(point, winner), point.t) < 0) winner = d;
  }
  return winner;
}

// ---------------------------------------------------------------------------
// Cylinders and lengths

namespace {

void require_origami_curve(const CurveClass& c, const Origami& o) {
  if (o.lattice_model()) {
    if (!c.slope()) throw std::invalid_argument("curve is not on the once-punctured torus");
    return;
  }
  if (c.kind() == CurveKind::slope || !c.complex() || !(*c.complex() == *o.complex())) {
    throw std::invalid_argument("curve is not drawn on this origami");
  }
}

FlatCylinder lattice_cylinder(const FlowPoint& point, const Slope& direction) {
  FlatCylinder cyl;
  cyl.direction = make_slope(direction.p, direction.q);
  cyl.periods = 1;
  cyl.circumference = direction_form(point, cyl.direction);
  cyl.area = Rational(1);
  cyl.t = point.t;
  cyl.core = CurveClass::from_slope(cyl.direction);
  return cyl;
}

// Exact form of 1 / modulus = circumference^2 / area.
LengthForm inverse_modulus_form(const FlatCylinder& cyl) {
  return {cyl.circumference.a * cyl.area.den(), cyl.circumference.b * cyl.area.den(),
          cyl.circumference.n * cyl.area.num()};
}

bool form_less(const FlatCylinder& a, const FlatCylinder& b, double t) {
  const int c = compare_lengths(inverse_modulus_form(a), inverse_modulus_form(b), t);
  if (c != 0) return c < 0;
  if (a.direction != b.direction) return slope_angle_less(a.direction, b.direction);
  return a.core.key() < b.core.key();
}

}  // namespace

std::vector<FlatCylinder> cylinders_in_direction(const FlowPoint& point, const Slope& direction_in) {
  const Slope direction = make_slope(direction_in.p, direction_in.q);
  const auto& o = *point.origami;
  if (o.lattice_model()) return {lattice_cylinder(point, direction)};

  std::vector<FlatCylinder> out;
  std::vector<bool> covered(static_cast<std::size_t>(o.size()), false);
  const auto unit = direction_form(point, direction);
  for (int s = 0; s < o.size(); ++s) {
    if (covered[s]) continue;
    auto traced = trace_closed_line(*o.complex(), direction, s);
    for (int v : traced.visited) covered[v] = true;
    const int c = static_cast<int>(traced.visited.size());
    FlatCylinder cyl;
    cyl.direction = direction;
    cyl.periods = c;
    cyl.circumference = {unit.a * c * c, unit.b * c * c, unit.n};
    cyl.area = Rational(c, o.size());
    cyl.t = point.t;
    cyl.core = CurveClass::core(o.complex(), o.surface(), direction, std::move(traced));
    out.push_back(std::move(cyl));
  }
  return out;
}

FlatCylinder cylinder_of(const CurveClass& c, const FlowPoint& point) {
  if (!c.is_geodesic()) throw std::domain_error("not tightenable");
  const auto& o = *point.origami;
  require_origami_curve(c, o);
  if (o.lattice_model()) return lattice_cylinder(point, *c.slope());
  for (auto& cyl : cylinders_in_direction(point, *c.direction())) {
    if (cyl.core == c) return cyl;
  }
  throw std::logic_error("cylinder_of: core not found among the cylinders of its direction");
}

std::pair<CurveClass, CurveClass> core_curves(const Origami& o) {
  if (o.lattice_model()) return {CurveClass::from_slope(o.reference_xi()), CurveClass::from_slope(o.reference_zeta())};
  auto horizontal = trace_closed_line(*o.complex(), {1, 0}, 0);
  auto vertical = trace_closed_line(*o.complex(), {0, 1}, 0);
  return {CurveClass::core(o.complex(), o.surface(), {1, 0}, std::move(horizontal)),
          CurveClass::core(o.complex(), o.surface(), {0, 1}, std::move(vertical))};
}

LengthForm flat_length(const CurveClass& c, const FlowPoint& point) {
  if (!c.is_geodesic()) throw std::domain_error("not tightenable");
  const auto& o = *point.origami;
  require_origami_curve(c, o);
  if (o.lattice_model()) return direction_form(point, *c.slope());
  const auto unit = direction_form(point, *c.direction());
  const __int128 k = c.periods();
  return {unit.a * k * k, unit.b * k * k, unit.n};
}

std::vector<FlatCylinder> candidate_cylinders(const FlowPoint& point, double factor) {
  const long double best = direction_form(point, shortest_direction(point)).squared(point.t);
  std::vector<FlatCylinder> out;
  const long double f = factor;
  for (const auto& d : short_directions(point, best * f * f)) {
    for (auto& cyl : cylinders_in_direction(point, d)) out.push_back(std::move(cyl));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Saddle connections

namespace {

struct CornerTrace {
  std::vector<int> squares;
  int end_vertex = 0;
};

// Straight segment leaving a vertex in primitive direction d through square s:
// from the lower-left corner for angles in [0, pi/2), from the lower-right
// corner for [pi/2, pi). All lattice points are vertices, so it stops after
// one period.
CornerTrace trace_from_corner(const SquareComplex& complex, const Slope& d, int s) {
  CornerTrace out;
  if (d.q == 0) {
    out.squares = {s};
    out.end_vertex = complex.corner_vertex(complex.right(s));
    return out;
  }
  if (d.p == 0) {
    out.squares = {s};
    out.end_vertex = complex.corner_vertex(complex.right(complex.up(s)));
    return out;
  }
  const Rational p(d.p), q(d.q);
  Point at{d.p > 0 ? Rational(0) : Rational(1), Rational(0)};
  const std::size_t guard = static_cast<std::size_t>(std::llabs(d.p) + d.q) + 2;
  while (out.squares.size() <= guard) {
    out.squares.push_back(s);
    const Rational to_top = (Rational(1) - at.y) / q;
    const Rational to_side = d.p > 0 ? (Rational(1) - at.x) / p : at.x / -p;
    if (to_top == to_side) {
      out.end_vertex = d.p > 0 ? complex.corner_vertex(complex.right(complex.up(s)))
                               : complex.corner_vertex(complex.up(s));
      return out;
    }
    if (to_top < to_side) {
      at = {at.x + to_top * p, 0};
      s = complex.up(s);
    } else {
      at = {d.p > 0 ? Rational(0) : Rational(1), at.y + to_side * q};
      s = d.p > 0 ? complex.right(s) : complex.left(s);
    }
  }
  throw std::logic_error("saddle connection trace did not terminate");
}

}  // namespace

std::vector<SaddleConnection> enumerate_saddle_connections(const FlowPoint& point, double max_length) {
  if (!(max_length > 0)) throw std::domain_error("saddle connection bound must be positive");
  const auto& o = *point.origami;
  const long double bound = static_cast<long double>(max_length) * max_length;
  std::vector<SaddleConnection> out;
  for (const auto& d : short_directions(point, bound)) {
    const auto form = direction_form(point, d);
    if (o.lattice_model()) {
      SaddleConnection sc;
      const auto [hx, hy] = o.periods().apply(d.p, d.q);
      sc.hol_x = static_cast<std::int64_t>(hx);
      sc.hol_y = static_cast<std::int64_t>(hy);
      sc.length = form;
      out.push_back(std::move(sc));
      continue;
    }
    for (int s = 0; s < o.size(); ++s) {
      // Every vertex is marked here, so every corner starts one connection.
      auto traced = trace_from_corner(*o.complex(), d, s);
      SaddleConnection sc;
      sc.hol_x = d.p;
      sc.hol_y = d.q;
      sc.start_vertex = d.p > 0 || d.q == 0 ? o.complex()->corner_vertex(s) : o.complex()->corner_vertex(o.complex()->right(s));
      sc.end_vertex = traced.end_vertex;
      sc.squares = std::move(traced.squares);
      sc.length = form;
      out.push_back(std::move(sc));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Extremal length and systole

ExtremalBounds extremal_length_bounds(const CurveClass& c, const FlowPoint& point) {
  const auto cyl = cylinder_of(c, point);
  const long double lower = cyl.circumference.squared(point.t);
  const long double collars = expanding_annulus_modulus(c, point, Side::left) +
                              expanding_annulus_modulus(c, point, Side::right);
  const long double upper = 1.0L / (cyl.modulus() + collars);
  return {lower, std::max(lower, upper)};
}

long double expanding_annulus_modulus(const CurveClass& c, const FlowPoint& point, Side side) {
  (void)side;
  const auto cyl = cylinder_of(c, point);
  const auto& o = *point.origami;
  // Both boundaries of a cylinder on a square-tiled surface are chains of
  // saddle connections between vertices. With every vertex marked (or the one
  // puncture of the torus lying on every cylinder boundary) R is zero.
  const bool boundary_marked = o.lattice_model() || o.complex()->marked_count() == o.complex()->vertex_count();
  if (!boundary_marked) throw std::logic_error("expanding_annulus_modulus: unmarked vertices are not supported");
  const long double r = 0;
  const long double ell = cyl.circumference_at();
  if (r <= 0) return 0;
  return std::max(0.0L, std::log(r / ell) / (2 * std::acos(-1.0L)));
}

SystoleEstimate systole_estimate(const FlowPoint& point) {
  auto cylinders = candidate_cylinders(point, 3.0);
  const auto best_of = [&](const std::vector<FlatCylinder>& set) {
    return *std::min_element(set.begin(), set.end(), [&](const auto& a, const auto& b) { return form_less(a, b, point.t); });
  };
  // 1/Mod >= the squared length of the direction, so nothing longer than the
  // current best bound can win.
  const long double shortest = direction_form(point, shortest_direction(point)).squared(point.t);
  const long double current = inverse_modulus_form(best_of(cylinders)).squared(point.t);
  if (current > 9 * shortest) {
    cylinders.clear();
    for (const auto& d : short_directions(point, current)) {
      for (auto& cyl : cylinders_in_direction(point, d)) cylinders.push_back(std::move(cyl));
    }
  }
  const auto& winner = best_of(cylinders);
  SystoleEstimate out;
  out.witness = winner.core;
  out.value = extremal_length_bounds(winner.core, point).upper;
  out.lower = std::numeric_limits<long double>::infinity();
  for (const auto& cyl : cylinders) out.lower = std::min(out.lower, cyl.circumference.squared(point.t));
  return out;
}

bool is_slim(const CurveClass& c, const FlowPoint& point, double rho) {
  if (!(rho > 0)) throw std::domain_error("is_slim: rho must be positive");
  if (!c.is_geodesic()) return true;
  return cylinder_of(c, point).modulus() < rho;
}

// ---------------------------------------------------------------------------
// Thin-thick decomposition

namespace {

double pants_diameter(const FlowPoint& point, const std::vector<int>& vertices, double sc_bound,
                      const std::optional<Slope>& excluded) {
  if (vertices.empty()) return 0;
  std::map<std::pair<int, int>, long double> shortest;
  for (const auto& sc : enumerate_saddle_connections(point, sc_bound)) {
    if (excluded && point.origami->lattice_model()) {
      // On the torus the cut curve itself is not inside the pants.
      const auto [ex, ey] = point.origami->periods().apply(excluded->p, excluded->q);
      if (static_cast<__int128>(sc.hol_x) * ey == static_cast<__int128>(sc.hol_y) * ex) continue;
    }
    const auto key = std::minmax(sc.start_vertex, sc.end_vertex);
    const long double len = sc.length.value(point.t);
    auto [it, inserted] = shortest.emplace(key, len);
    if (!inserted) it->second = std::min(it->second, len);
  }
  long double diameter = 0;
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    for (std::size_t j = i; j < vertices.size(); ++j) {
      const auto it = shortest.find(std::minmax(vertices[i], vertices[j]));
      diameter = std::max(diameter, it == shortest.end() ? static_cast<long double>(sc_bound) : it->second);
    }
  }
  return static_cast<double>(diameter);
}

}  // namespace

ThinThick thin_thick(const FlowPoint& point, double epsilon, double epsilon0, double sc_bound) {
  if (!(epsilon > 0) || !(epsilon <= epsilon0)) throw std::domain_error("thin_thick: epsilon out of range");
  const auto& o = *point.origami;
  ThinThick out;
  out.epsilon = epsilon;

  // 1/Mod >= squared direction length, so only directions shorter than
  // sqrt(epsilon) can carry short cylinders.
  std::vector<FlatCylinder> short_cyls;
  for (const auto& d : short_directions(point, epsilon)) {
    for (auto& cyl : cylinders_in_direction(point, d)) {
      if (inverse_modulus_form(cyl).squared(point.t) < epsilon) short_cyls.push_back(std::move(cyl));
    }
  }
  std::sort(short_cyls.begin(), short_cyls.end(), [&](const auto& a, const auto& b) { return form_less(a, b, point.t); });
  for (const auto& cyl : short_cyls) {
    bool disjoint = true;
    for (const auto& chosen : out.short_curves) disjoint = disjoint && geometric_intersection(chosen, cyl.core) == 0;
    if (disjoint) out.short_curves.push_back(cyl.core);
  }

  const auto candidates = candidate_cylinders(point, 3.0);
  if (out.short_curves.empty()) {
    ThinThickComponent whole;
    whole.genus = o.surface().genus;
    whole.marked = o.surface().punctures;
    whole.euler = 2 - 2 * whole.genus;
    whole.whole_surface = true;
    long double size = std::numeric_limits<long double>::infinity();
    for (const auto& cyl : candidates) size = std::min(size, cyl.circumference_at());
    whole.size = static_cast<double>(size);
    out.components.push_back(std::move(whole));
    return out;
  }

  if (o.lattice_model()) {
    // Cutting the once-punctured torus along one curve leaves a pair of pants
    // (an annulus around the puncture); no second curve is disjoint.
    ThinThickComponent pants;
    pants.euler = 0;
    pants.marked = 1;
    pants.boundary_sides = 2;
    pants.pants = true;
    pants.boundary = {{0, Side::left}, {0, Side::right}};
    pants.size = pants_diameter(point, {0}, sc_bound, out.short_curves.front().slope());
    out.components.push_back(std::move(pants));
    return out;
  }

  std::vector<const CurveClass*> cut;
  for (const auto& c : out.short_curves) cut.push_back(&c);
  const auto faces = complement_faces(*o.complex(), cut);
  const auto sides = curve_side_faces(*o.complex(), cut);
  for (const auto& face : faces) {
    ThinThickComponent comp;
    comp.euler = face.euler;
    comp.marked = face.marked;
    comp.boundary_sides = face.boundary_sides;
    comp.genus = (2 - face.boundary_sides - face.euler) / 2;
    comp.pants = comp.genus == 0 && face.boundary_sides + face.marked == 3;
    comp.size = std::numeric_limits<double>::infinity();
    out.components.push_back(std::move(comp));
  }
  for (std::size_t i = 0; i < sides.size(); ++i) {
    out.components[sides[i].first].boundary.push_back({static_cast<int>(i), Side::left});
    out.components[sides[i].second].boundary.push_back({static_cast<int>(i), Side::right});
  }

  // Size: shortest candidate core lying inside the piece.
  std::vector<std::pair<int, Point>> probes;
  std::vector<long double> lengths;
  for (const auto& cyl : candidates) {
    if (std::find(out.short_curves.begin(), out.short_curves.end(), cyl.core) != out.short_curves.end()) continue;
    bool disjoint = true;
    for (const auto& c : out.short_curves) disjoint = disjoint && geometric_intersection(c, cyl.core) == 0;
    if (!disjoint) continue;
    const auto& first = cyl.core.segments().front();
    probes.emplace_back(first.square, first.from);
    lengths.push_back(cyl.circumference_at());
  }
  const auto located = probe_faces(*o.complex(), cut, probes);
  for (std::size_t i = 0; i < located.size(); ++i) {
    if (located[i] < 0) continue;
    auto& comp = out.components[located[i]];
    if (!comp.pants) comp.size = std::min(comp.size, static_cast<double>(lengths[i]));
  }
  for (std::size_t f = 0; f < faces.size(); ++f) {
    auto& comp = out.components[f];
    if (!comp.pants) continue;
    std::vector<int> marked;
    for (int v : faces[f].vertices) {
      if (o.complex()->marked(v)) marked.push_back(v);
    }
    if (marked.empty()) {
      // No cone point inside: fall back to the longest boundary curve.
      double longest = 0;
      for (const auto& b : comp.boundary) {
        longest = std::max(longest, static_cast<double>(flat_length(out.short_curves[b.curve], point).value(point.t)));
      }
      comp.size = longest;
    } else {
      comp.size = pants_diameter(point, marked, sc_bound, std::nullopt);
    }
  }
  return out;
}

bool is_M_large(const ThinThick& decomposition, int component, const FlowPoint& point, double M) {
  const auto& comp = decomposition.components.at(static_cast<std::size_t>(component));
  if (comp.pants) throw std::domain_error("is_M_large: component is a pair of pants");
  if (comp.whole_surface) throw std::domain_error("is_M_large: component is the whole surface");
  for (const auto& b : comp.boundary) {
    if (expanding_annulus_modulus(decomposition.short_curves[b.curve], point, b.side) < M) return false;
  }
  return true;
}

}  // namespace cgdist
