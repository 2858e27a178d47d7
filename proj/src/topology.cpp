#include "cgdist/topology.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <set>
#include <utility>

#include "cgdist/farey.hpp"

namespace cgdist {

Slope make_slope(std::int64_t p, std::int64_t q) {
  if (std::gcd(p, q) != 1) {
    throw std::domain_error("slope " + std::to_string(p) + "/" + std::to_string(q) + " is not primitive");
  }
  if (q < 0 || (q == 0 && p < 0)) {
    p = -p;
    q = -q;
  }
  return {p, q};
}

bool slope_angle_less(const Slope& a, const Slope& b) {
  if (a == b) return false;
  if (a.q == 0) return true;
  if (b.q == 0) return false;
  return static_cast<__int128>(a.p) * b.q - static_cast<__int128>(a.q) * b.p > 0;
}

std::int64_t slope_det(const Slope& a, const Slope& b) {
  const __int128 d = static_cast<__int128>(a.p) * b.q - static_cast<__int128>(a.q) * b.p;
  return static_cast<std::int64_t>(d < 0 ? -d : d);
}

// ---------------------------------------------------------------------------
// SquareComplex

namespace {

std::vector<int> inverse_of(const std::vector<int>& perm) {
  std::vector<int> inv(perm.size(), -1);
  for (std::size_t i = 0; i < perm.size(); ++i) {
    const int j = perm[i];
    if (j < 0 || j >= static_cast<int>(perm.size()) || inv[j] != -1) {
      throw std::invalid_argument("square gluing is not a permutation");
    }
    inv[j] = static_cast<int>(i);
  }
  return inv;
}

int find_root(std::vector<int>& parent, int x) {
  while (parent[x] != x) {
    parent[x] = parent[parent[x]];
    x = parent[x];
  }
  return x;
}

void unite(std::vector<int>& parent, int a, int b) {
  a = find_root(parent, a);
  b = find_root(parent, b);
  if (a != b) parent[std::max(a, b)] = std::min(a, b);
}

}  // namespace

SquareComplex::SquareComplex(std::vector<int> right, std::vector<int> up)
    : SquareComplex(std::move(right), std::move(up), {}) {}

SquareComplex::SquareComplex(std::vector<int> right, std::vector<int> up, std::vector<bool> marked)
    : right_(std::move(right)), up_(std::move(up)) {
  if (right_.empty() || right_.size() != up_.size()) {
    throw std::invalid_argument("square complex needs two permutations of equal positive size");
  }
  left_ = inverse_of(right_);
  down_ = inverse_of(up_);

  // The upper-right corner of r is the lower-left corner of both right(up(r)) and up(right(r)).
  const int n = size();
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  for (int r = 0; r < n; ++r) unite(parent, right_[up_[r]], up_[right_[r]]);

  std::map<int, int> ids;
  corner_vertex_.resize(n);
  for (int s = 0; s < n; ++s) {
    const int root = find_root(parent, s);
    auto [it, inserted] = ids.emplace(root, static_cast<int>(ids.size()));
    corner_vertex_[s] = it->second;
    if (inserted) vertex_corners_.push_back(0);
    ++vertex_corners_[it->second];
  }
  if (marked.empty()) {
    marked_.assign(vertex_corners_.size(), true);
  } else {
    if (marked.size() != vertex_corners_.size()) throw std::invalid_argument("marked flags do not match vertices");
    marked_ = std::move(marked);
  }
}

int SquareComplex::marked_count() const {
  return static_cast<int>(std::count(marked_.begin(), marked_.end(), true));
}

std::shared_ptr<const SquareComplex> unit_torus_complex() {
  static const auto complex = std::make_shared<const SquareComplex>(std::vector<int>{0}, std::vector<int>{0});
  return complex;
}

// ---------------------------------------------------------------------------
// Line tracing

TracedLine trace_closed_line(const SquareComplex& complex, const Slope& direction, int start_square) {
  TracedLine out;
  const Rational half(1, 2);
  if (direction.q == 0) {
    int s = start_square;
    do {
      out.visited.push_back(s);
      out.segments.push_back({s, {0, half}, {1, half}});
      s = complex.right(s);
    } while (s != start_square);
    return out;
  }

  const std::int64_t p = direction.p;
  const std::int64_t q = direction.q;
  const Rational x0(1, 2 * q);
  int s = start_square;
  Point at{x0, 0};
  out.visited.push_back(s);
  // A full period crosses |p| vertical and q horizontal edges.
  const std::size_t guard = static_cast<std::size_t>(complex.size()) * static_cast<std::size_t>(std::llabs(p) + q) + 1;
  while (true) {
    const Rational to_top = (Rational(1) - at.y) / Rational(q);
    std::optional<Rational> to_side;
    if (p > 0) to_side = (Rational(1) - at.x) / Rational(p);
    if (p < 0) to_side = at.x / Rational(-p);

    if (to_side && *to_side == to_top) throw std::logic_error("traced line hit a vertex");
    Point exit;
    int next = s;
    Point entry;
    if (!to_side || to_top < *to_side) {
      exit = {at.x + to_top * Rational(p), 1};
      next = complex.up(s);
      entry = {exit.x, 0};
    } else {
      exit = {p > 0 ? Rational(1) : Rational(0), at.y + *to_side * Rational(q)};
      next = p > 0 ? complex.right(s) : complex.left(s);
      entry = {p > 0 ? Rational(0) : Rational(1), exit.y};
    }
    out.segments.push_back({s, at, exit});
    s = next;
    at = entry;
    if (at.y == Rational(0) && at.x == x0) {
      if (s == start_square) break;
      out.visited.push_back(s);
    }
    if (out.segments.size() > guard) throw std::logic_error("traced line failed to close");
  }
  return out;
}

std::vector<Segment> torus_core_segments(const Slope& slope) {
  return trace_closed_line(*unit_torus_complex(), slope, 0).segments;
}

// ---------------------------------------------------------------------------
// CurveClass

namespace {

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string encode(const Segment& s) {
  return std::to_string(s.square) + ":" + s.from.x.str() + "," + s.from.y.str() + ">" + s.to.x.str() + "," +
         s.to.y.str() + ";";
}

}  // namespace

CurveClass CurveClass::from_slope(const Slope& slope) {
  CurveClass c;
  c.kind_ = CurveKind::slope;
  c.surface_ = {1, 1};
  c.slope_ = make_slope(slope.p, slope.q);
  c.direction_ = c.slope_;
  c.key_ = "s" + c.slope_->str();
  return c;
}

CurveClass CurveClass::core(std::shared_ptr<const SquareComplex> complex, SurfaceSig surface,
                            const Slope& direction, TracedLine traced) {
  CurveClass c;
  c.kind_ = CurveKind::core;
  c.surface_ = surface;
  c.complex_ = std::move(complex);
  c.direction_ = make_slope(direction.p, direction.q);
  c.periods_ = static_cast<int>(traced.visited.size());
  const int first = *std::min_element(traced.visited.begin(), traced.visited.end());
  c.key_ = "c" + c.direction_->str() + "@" + std::to_string(first + 1);
  c.segments_ = std::move(traced.segments);
  if (surface.complexity() == 1) c.slope_ = c.direction_;
  return c;
}

CurveClass CurveClass::combinatorial(std::shared_ptr<const SquareComplex> complex, SurfaceSig surface,
                                     std::vector<Segment> segments) {
  if (segments.empty()) throw std::invalid_argument("combinatorial curve needs segments");
  CurveClass c;
  c.kind_ = CurveKind::combinatorial;
  c.surface_ = surface;
  c.complex_ = std::move(complex);
  std::size_t start = 0;
  for (std::size_t i = 1; i < segments.size(); ++i) {
    const auto& a = segments[i];
    const auto& b = segments[start];
    if (std::tie(a.square, a.from) < std::tie(b.square, b.from)) start = i;
  }
  std::rotate(segments.begin(), segments.begin() + static_cast<std::ptrdiff_t>(start), segments.end());
  std::string text;
  for (const auto& s : segments) text += encode(s);
  char buf[32];
  std::snprintf(buf, sizeof buf, "w%016llx", static_cast<unsigned long long>(fnv1a(text)));
  c.key_ = buf;
  c.segments_ = std::move(segments);
  return c;
}

// ---------------------------------------------------------------------------
// Crossings

namespace {

std::shared_ptr<const SquareComplex> complex_of(const CurveClass& c) {
  if (c.complex()) return c.complex();
  return unit_torus_complex();
}

std::vector<Segment> segments_of(const CurveClass& c) {
  if (c.kind() == CurveKind::slope) return torus_core_segments(*c.slope());
  return {c.segments().begin(), c.segments().end()};
}

void require_same_surface(const CurveClass& a, const CurveClass& b) {
  if (!(a.surface() == b.surface()) || !(*complex_of(a) == *complex_of(b))) {
    throw std::domain_error("curves live on different surfaces");
  }
}

int orient(const Point& a, const Point& b, const Point& c) {
  return ((b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)).sign();
}

double orient_fast(const double* a, const double* b, const double* c) {
  return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
}

bool on_segment(const Point& a, const Point& b, const Point& p) {
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
         p.y <= std::max(a.y, b.y);
}

struct BoundaryPoint {
  int square;
  Point at;
  friend auto operator<=>(const BoundaryPoint&, const BoundaryPoint&) = default;
};

BoundaryPoint canonical_point(const SquareComplex& complex, int square, Point at) {
  if (at.x == Rational(1)) {
    square = complex.right(square);
    at.x = 0;
  }
  if (at.y == Rational(1)) {
    square = complex.up(square);
    at.y = 0;
  }
  return {square, at};
}

enum class Contact { none, crossing, touch, overlap };

/// Exact relation of two segments in the same square; `where` receives the
/// contact point for touches.
Contact contact(const Segment& s, const Segment& t, Point& where) {
  const int o1 = orient(s.from, s.to, t.from);
  const int o2 = orient(s.from, s.to, t.to);
  const int o3 = orient(t.from, t.to, s.from);
  const int o4 = orient(t.from, t.to, s.to);
  if (o1 * o2 < 0 && o3 * o4 < 0) return Contact::crossing;
  if (o1 == 0 && o2 == 0) {
    const bool overlap = on_segment(s.from, s.to, t.from) || on_segment(s.from, s.to, t.to) ||
                         on_segment(t.from, t.to, s.from);
    if (!overlap) return Contact::none;
    where = on_segment(s.from, s.to, t.from) ? t.from : on_segment(s.from, s.to, t.to) ? t.to : s.from;
    return Contact::overlap;
  }
  if (o1 == 0 && on_segment(s.from, s.to, t.from)) return where = t.from, Contact::touch;
  if (o2 == 0 && on_segment(s.from, s.to, t.to)) return where = t.to, Contact::touch;
  if (o3 == 0 && on_segment(t.from, t.to, s.from)) return where = s.from, Contact::touch;
  if (o4 == 0 && on_segment(t.from, t.to, s.to)) return where = s.to, Contact::touch;
  return Contact::none;
}

struct FastSegment {
  double from[2];
  double to[2];
  const Segment* exact;
};

std::int64_t count_contacts(const SquareComplex& complex, const std::vector<Segment>& a,
                            const std::vector<Segment>& b, bool stop_at_first) {
  std::vector<std::vector<FastSegment>> by_square(complex.size());
  for (const auto& s : b) {
    by_square[s.square].push_back(
        {{s.from.x.to_double(), s.from.y.to_double()}, {s.to.x.to_double(), s.to.y.to_double()}, &s});
  }
  constexpr double kMargin = 1e-9;
  std::int64_t interior = 0;
  std::set<BoundaryPoint> touches;
  for (const auto& s : a) {
    const double p0[2] = {s.from.x.to_double(), s.from.y.to_double()};
    const double p1[2] = {s.to.x.to_double(), s.to.y.to_double()};
    for (const auto& t : by_square[s.square]) {
      const double o1 = orient_fast(p0, p1, t.from);
      const double o2 = orient_fast(p0, p1, t.to);
      const double o3 = orient_fast(t.from, t.to, p0);
      const double o4 = orient_fast(t.from, t.to, p1);
      const bool clear = std::fabs(o1) > kMargin && std::fabs(o2) > kMargin && std::fabs(o3) > kMargin &&
                         std::fabs(o4) > kMargin;
      if (clear) {
        if ((o1 < 0) != (o2 < 0) && (o3 < 0) != (o4 < 0)) ++interior;
      } else {
        Point where;
        switch (contact(s, *t.exact, where)) {
          case Contact::none:
            break;
          case Contact::crossing:
            ++interior;
            break;
          case Contact::touch:
          case Contact::overlap:
            touches.insert(canonical_point(complex, s.square, where));
            break;
        }
      }
      if (stop_at_first && (interior > 0 || !touches.empty())) return 1;
    }
  }
  return interior + static_cast<std::int64_t>(touches.size());
}

}  // namespace

std::int64_t drawn_crossings(const CurveClass& a, const CurveClass& b) {
  require_same_surface(a, b);
  return count_contacts(*complex_of(a), segments_of(a), segments_of(b), false);
}

std::int64_t geometric_intersection(const CurveClass& a, const CurveClass& b) {
  require_same_surface(a, b);
  if (a.is_geodesic() && b.is_geodesic()) {
    if (a.key() == b.key()) return 0;
    if (*a.direction() == *b.direction()) return 0;  // distinct parallel cores are disjoint
    if (a.kind() == CurveKind::slope && b.kind() == CurveKind::slope) {
      const auto size = [](const Slope& s) { return std::llabs(s.p) + s.q; };
      if (size(*a.slope()) > 4096 || size(*b.slope()) > 4096) return slope_det(*a.slope(), *b.slope());
    }
    return drawn_crossings(a, b);
  }
  const auto drawn = count_contacts(*complex_of(a), segments_of(a), segments_of(b), true);
  if (drawn == 0) return 0;
  throw std::domain_error("not tightenable: intersection of a non-geodesic representative");
}

// ---------------------------------------------------------------------------
// Complement analysis

namespace {

// Perimeter parameter in [0,4), counterclockwise from the lower-left corner.
Rational perimeter(const Point& p) {
  if (p.y == Rational(0)) return p.x;
  if (p.x == Rational(1)) return Rational(1) + p.y;
  if (p.y == Rational(1)) return Rational(3) - p.x;
  if (p.x == Rational(0)) return Rational(4) - p.y;
  throw std::logic_error("segment endpoint is not on the square boundary");
}

Point from_perimeter(const Rational& t) {
  if (t < Rational(1)) return {t, 0};
  if (t < Rational(2)) return {1, t - Rational(1)};
  if (t < Rational(3)) return {Rational(3) - t, 1};
  return {0, Rational(4) - t};
}

struct Chord {
  Point from;
  Point to;
};

struct SquareCells {
  std::vector<Rational> breaks;  // interval i spans breaks[i]..breaks[i+1]
  std::vector<int> cell;         // global cell id per interval
  int cell_count = 0;

  int interval_at(const Rational& t, bool after) const {
    const auto it = std::lower_bound(breaks.begin(), breaks.end(), t);
    const int idx = static_cast<int>(it - breaks.begin());
    if (after) return idx;  // interval starting at t
    return idx == 0 ? static_cast<int>(cell.size()) - 1 : idx - 1;
  }
};

struct Arrangement {
  std::vector<SquareCells> squares;
  std::vector<int> parent;
  std::vector<int> arc_owner;  // cell of each edge arc, one entry per arc
  int cells = 0;
};

Arrangement build_arrangement(const SquareComplex& complex, std::span<const CurveClass* const> curves) {
  const int n = complex.size();
  std::vector<std::vector<Chord>> chords(n);
  for (const auto* c : curves) {
    for (const auto& s : segments_of(*c)) chords[s.square].push_back({s.from, s.to});
  }

  Arrangement arr;
  arr.squares.resize(n);
  for (int s = 0; s < n; ++s) {
    auto& sq = arr.squares[s];
    std::vector<Rational> breaks = {0, 1, 2, 3};
    for (const auto& ch : chords[s]) {
      breaks.push_back(perimeter(ch.from));
      breaks.push_back(perimeter(ch.to));
    }
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
    sq.breaks = breaks;
    std::map<std::vector<bool>, int> local;
    for (std::size_t i = 0; i < breaks.size(); ++i) {
      const Rational hi = i + 1 < breaks.size() ? breaks[i + 1] : Rational(4);
      const Point mid = from_perimeter((breaks[i] + hi) / Rational(2));
      std::vector<bool> signs;
      signs.reserve(chords[s].size());
      for (const auto& ch : chords[s]) signs.push_back(orient(ch.from, ch.to, mid) > 0);
      auto [it, inserted] = local.emplace(std::move(signs), arr.cells);
      if (inserted) ++arr.cells;
      sq.cell.push_back(it->second);
    }
    sq.cell_count = static_cast<int>(local.size());
  }

  arr.parent.resize(arr.cells);
  std::iota(arr.parent.begin(), arr.parent.end(), 0);
  const auto edge_intervals = [](const SquareCells& sq, int lo, bool ascending) {
    std::vector<int> ids;
    for (std::size_t i = 0; i < sq.breaks.size(); ++i) {
      if (sq.breaks[i] >= Rational(lo) && sq.breaks[i] < Rational(lo + 1)) ids.push_back(sq.cell[i]);
    }
    if (!ascending) std::reverse(ids.begin(), ids.end());
    return ids;
  };
  for (int s = 0; s < n; ++s) {
    const auto right_side = edge_intervals(arr.squares[s], 1, true);
    const auto left_side = edge_intervals(arr.squares[complex.right(s)], 3, false);
    const auto top_side = edge_intervals(arr.squares[s], 2, false);
    const auto bottom_side = edge_intervals(arr.squares[complex.up(s)], 0, true);
    if (right_side.size() != left_side.size() || top_side.size() != bottom_side.size()) {
      throw std::logic_error("curve endpoints do not match across a square edge");
    }
    for (std::size_t j = 0; j < right_side.size(); ++j) {
      unite(arr.parent, right_side[j], left_side[j]);
      arr.arc_owner.push_back(right_side[j]);
    }
    for (std::size_t j = 0; j < top_side.size(); ++j) {
      unite(arr.parent, top_side[j], bottom_side[j]);
      arr.arc_owner.push_back(top_side[j]);
    }
  }
  return arr;
}

}  // namespace

std::vector<ComplementFace> complement_faces(const SquareComplex& complex,
                                             std::span<const CurveClass* const> curves) {
  auto arr = build_arrangement(complex, curves);
  std::map<int, int> face_of_root;
  std::vector<ComplementFace> faces;
  const auto face_index = [&](int cell) {
    const int root = find_root(arr.parent, cell);
    auto [it, inserted] = face_of_root.emplace(root, static_cast<int>(faces.size()));
    if (inserted) faces.emplace_back();
    return it->second;
  };
  for (int cell = 0; cell < arr.cells; ++cell) ++faces[face_index(cell)].euler;
  for (int owner : arr.arc_owner) --faces[face_index(owner)].euler;
  std::vector<bool> seen(complex.vertex_count(), false);
  for (int s = 0; s < complex.size(); ++s) {
    const int v = complex.corner_vertex(s);
    if (seen[v]) continue;
    seen[v] = true;
    auto& face = faces[face_index(arr.squares[s].cell.front())];
    ++face.euler;
    face.vertices.push_back(v);
    if (complex.marked(v)) ++face.marked;
  }
  for (const auto& [left, right] : curve_side_faces(complex, curves)) {
    ++faces[left].boundary_sides;
    ++faces[right].boundary_sides;
  }
  return faces;
}

std::vector<std::pair<int, int>> curve_side_faces(const SquareComplex& complex,
                                                  std::span<const CurveClass* const> curves) {
  auto arr = build_arrangement(complex, curves);
  // Face numbering must agree with complement_faces: faces are numbered in
  // order of first appearance over cells.
  std::map<int, int> face_of_root;
  for (int cell = 0; cell < arr.cells; ++cell) {
    face_of_root.emplace(find_root(arr.parent, cell), static_cast<int>(face_of_root.size()));
  }
  std::vector<std::pair<int, int>> sides;
  for (const auto* c : curves) {
    const auto segs = segments_of(*c);
    const auto& first = segs.front();
    const auto& sq = arr.squares[first.square];
    const Rational t = perimeter(first.from);
    const int before = sq.interval_at(t, false);
    const int after = sq.interval_at(t, true);
    sides.emplace_back(face_of_root.at(find_root(arr.parent, sq.cell[before])),
                       face_of_root.at(find_root(arr.parent, sq.cell[after])));
  }
  return sides;
}

std::vector<int> probe_faces(const SquareComplex& complex, std::span<const CurveClass* const> curves,
                             std::span<const std::pair<int, Point>> probes) {
  auto arr = build_arrangement(complex, curves);
  std::map<int, int> face_of_root;
  for (int cell = 0; cell < arr.cells; ++cell) {
    face_of_root.emplace(find_root(arr.parent, cell), static_cast<int>(face_of_root.size()));
  }
  std::vector<int> out;
  out.reserve(probes.size());
  for (const auto& [square, at] : probes) {
    const auto& sq = arr.squares[square];
    const Rational t = perimeter(at);
    const bool on_break = std::binary_search(sq.breaks.begin(), sq.breaks.end(), t);
    // Corners are breaks too; only chord endpoints put a probe on a curve.
    const bool corner = t == Rational(0) || t == Rational(1) || t == Rational(2) || t == Rational(3);
    if (on_break && !corner) {
      out.push_back(-1);
      continue;
    }
    const auto idx = std::upper_bound(sq.breaks.begin(), sq.breaks.end(), t) - sq.breaks.begin() - 1;
    out.push_back(face_of_root.at(find_root(arr.parent, sq.cell[static_cast<std::size_t>(idx)])));
  }
  return out;
}

bool is_essential(const CurveClass& c) {
  const CurveClass* one[] = {&c};
  for (const auto& face : complement_faces(*complex_of(c), one)) {
    if (face.euler == 1 && face.marked <= 1) return false;
  }
  return true;
}

bool fills(const CurveClass& a, const CurveClass& b) {
  require_same_surface(a, b);
  if (a.surface().complexity() < 2) {
    throw std::domain_error("fills: unsupported surface of complexity one; use farey_distance");
  }
  if (a.key() == b.key()) throw std::invalid_argument("fills: curves are the same class");
  if (a.is_geodesic() && b.is_geodesic() && *a.direction() == *b.direction()) return false;
  const CurveClass* pair[] = {&a, &b};
  bool filling = true;
  for (const auto& face : complement_faces(*complex_of(a), pair)) {
    if (face.euler != 1 || face.marked > 1) {
      filling = false;
      break;
    }
  }
  if (filling && !(a.is_geodesic() && b.is_geodesic())) {
    throw std::domain_error("fills: a filling verdict needs geodesic representatives");
  }
  return filling;
}

namespace {

std::optional<Slope> torus_slope(const CurveClass& c) {
  if (c.surface().complexity() != 1) return std::nullopt;
  if (c.slope()) return c.slope();
  if (c.kind() == CurveKind::core) return c.direction();
  return std::nullopt;
}

}  // namespace

bool distance_geq3(const CurveClass& a, const CurveClass& b) {
  require_same_surface(a, b);
  if (a.key() == b.key()) return false;
  if (a.surface().complexity() == 1) {
    const auto sa = torus_slope(a);
    const auto sb = torus_slope(b);
    if (!sa || !sb) throw std::domain_error("distance_geq3: complexity-one curves need slopes");
    return farey_distance(*sa, *sb) >= 3;
  }
  return fills(a, b);
}

std::int64_t annular_twist_bound(const CurveClass& core, const CurveClass& a, const CurveClass& b) {
  const auto ia = geometric_intersection(a, core);
  const auto ib = geometric_intersection(b, core);
  if (ia == 0 || ib == 0) throw std::domain_error("annular projection undefined: curve disjoint from the core");
  return geometric_intersection(a, b) / (ia * ib);
}

}  // namespace cgdist
