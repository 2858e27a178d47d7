#include "cgdist/witness_search.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <numeric>
#include <stdexcept>

namespace cgdist {

namespace {

constexpr int kSlots = 4;  // points k/5 on each side
constexpr int kPoints = 4 * kSlots;

// Boundary point b = side * kSlots + (k - 1); sides are bottom, right, top, left.
int side_of(int b) { return b / kSlots; }
int slot_of(int b) { return b % kSlots + 1; }

// Perimeter position in units of 1/5, counterclockwise from the lower-left corner.
int perimeter5(int b) {
  const int k = slot_of(b);
  switch (side_of(b)) {
    case 0: return k;
    case 1: return 5 + k;
    case 2: return 10 + (5 - k);
    default: return 15 + (5 - k);
  }
}

Point point_of(int b) {
  const Rational k(slot_of(b), 5);
  switch (side_of(b)) {
    case 0: return {k, 0};
    case 1: return {1, k};
    case 2: return {k, 1};
    default: return {0, k};
  }
}

Rational perimeter_of(const Point& p) {
  if (p.y == Rational(0)) return p.x;
  if (p.x == Rational(1)) return Rational(1) + p.y;
  if (p.y == Rational(1)) return Rational(3) - p.x;
  return Rational(4) - p.y;
}

struct Chord {
  Rational lo;
  Rational hi;  // perimeter parameters, lo < hi
};

// Straight chords of a convex square meet iff they share an endpoint or their
// endpoints interleave along the boundary.
bool meets(const Chord& a, const Chord& b) {
  if (a.lo == b.lo || a.lo == b.hi || a.hi == b.lo || a.hi == b.hi) return true;
  const bool lo_inside = a.lo < b.lo && b.lo < a.hi;
  const bool hi_inside = a.lo < b.hi && b.hi < a.hi;
  return lo_inside != hi_inside;
}

class Enumerator {
 public:
  Enumerator(std::shared_ptr<const SquareComplex> complex, SurfaceSig surface,
             std::span<const CurveClass* const> avoid, int budget, std::size_t cap)
      : complex_(std::move(complex)), surface_(surface), budget_(budget), cap_(cap) {
    const int n = complex_->size();
    obstacles_.resize(static_cast<std::size_t>(n));
    placed_.resize(static_cast<std::size_t>(n));
    for (const auto* c : avoid) {
      for (const auto& s : c->segments()) {
        Rational u = perimeter_of(s.from), v = perimeter_of(s.to);
        if (v < u) std::swap(u, v);
        obstacles_[s.square].push_back({u, v});
      }
    }
    used_.assign(static_cast<std::size_t>(n) * 2 * kSlots, false);
  }

  SlotCurveSearch run() {
    const int n = complex_->size();
    for (int e0 = 0; e0 < n * 2 * kSlots && out_.complete; ++e0) {
      start_ = e0;
      const int s = e0 / (2 * kSlots);
      const bool vertical_edge = (e0 / kSlots) % 2 == 0;  // right side of s
      const int k = e0 % kSlots + 1;
      // Cross e0 left-to-right or bottom-to-top.
      const int square = vertical_edge ? complex_->right(s) : complex_->up(s);
      const int entry = vertical_edge ? 3 * kSlots + (k - 1) : 0 * kSlots + (k - 1);
      used_[e0] = true;
      extend(square, entry);
      used_[e0] = false;
    }
    return std::move(out_);
  }

 private:
  // Edge slot id: right side of s is (2s) * kSlots + k - 1, top side (2s + 1) * kSlots + k - 1.
  int edge_slot(int square, int b) const {
    const int k = slot_of(b);
    switch (side_of(b)) {
      case 0: return (2 * complex_->down(square) + 1) * kSlots + k - 1;
      case 1: return (2 * square) * kSlots + k - 1;
      case 2: return (2 * square + 1) * kSlots + k - 1;
      default: return (2 * complex_->left(square)) * kSlots + k - 1;
    }
  }

  int next_square(int square, int b) const {
    switch (side_of(b)) {
      case 0: return complex_->down(square);
      case 1: return complex_->right(square);
      case 2: return complex_->up(square);
      default: return complex_->left(square);
    }
  }

  static int opposite_point(int b) {
    static constexpr int flip[4] = {2, 3, 0, 1};
    return flip[side_of(b)] * kSlots + slot_of(b) - 1;
  }

  bool chord_ok(int square, const Chord& c) const {
    for (const auto& o : obstacles_[square]) {
      if (meets(c, o)) return false;
    }
    for (const auto& o : placed_[square]) {
      if (meets(c, o)) return false;
    }
    return true;
  }

  void extend(int square, int entry) {
    if (++out_.expanded > cap_) {
      out_.complete = false;
      return;
    }
    const bool start_vertical = (start_ / kSlots) % 2 == 0;
    for (int exit = 0; exit < kPoints && out_.complete; ++exit) {
      if (side_of(exit) == side_of(entry)) continue;
      const int e = edge_slot(square, exit);
      int lo = perimeter5(entry), hi = perimeter5(exit);
      if (hi < lo) std::swap(lo, hi);
      const Chord chord{Rational(lo, 5), Rational(hi, 5)};
      if (e == start_) {
        // Must leave through e0 the way the first chord entered it.
        if (side_of(exit) != (start_vertical ? 1 : 2)) continue;
        if (!chord_ok(square, chord)) continue;
        path_.push_back({square, point_of(entry), point_of(exit)});
        record();
        path_.pop_back();
        continue;
      }
      if (e < start_ || used_[e]) continue;
      if (static_cast<int>(path_.size()) + 2 > budget_) continue;
      if (!chord_ok(square, chord)) continue;
      used_[e] = true;
      placed_[square].push_back(chord);
      path_.push_back({square, point_of(entry), point_of(exit)});
      extend(next_square(square, exit), opposite_point(exit));
      path_.pop_back();
      placed_[square].pop_back();
      used_[e] = false;
    }
  }

  void record() {
    auto curve = CurveClass::combinatorial(complex_, surface_, path_);
    if (is_essential(curve)) out_.curves.push_back(std::move(curve));
  }

  std::shared_ptr<const SquareComplex> complex_;
  SurfaceSig surface_;
  int budget_;
  std::size_t cap_;
  int start_ = 0;
  std::vector<std::vector<Chord>> obstacles_;
  std::vector<std::vector<Chord>> placed_;
  std::vector<bool> used_;
  std::vector<Segment> path_;
  SlotCurveSearch out_;
};

bool adjacent(const CurveClass& x, const CurveClass& y) {
  if (x == y) return false;
  if (x.is_geodesic() && y.is_geodesic()) return geometric_intersection(x, y) == 0;
  return drawn_crossings(x, y) == 0;
}

// Cores of every cylinder in directions of height at most 3.
std::vector<CurveClass> low_cores(const std::shared_ptr<const SquareComplex>& complex, SurfaceSig surface) {
  std::vector<CurveClass> out;
  std::vector<Slope> dirs = {{1, 0}};
  for (std::int64_t q = 1; q <= 3; ++q) {
    for (std::int64_t p = -3; p <= 3; ++p) {
      if (std::gcd(p, q) == 1) dirs.push_back({p, q});
    }
  }
  for (const auto& d : dirs) {
    std::vector<bool> covered(static_cast<std::size_t>(complex->size()), false);
    for (int s = 0; s < complex->size(); ++s) {
      if (covered[s]) continue;
      auto traced = trace_closed_line(*complex, d, s);
      for (int v : traced.visited) covered[v] = true;
      out.push_back(CurveClass::core(complex, surface, d, std::move(traced)));
    }
  }
  return out;
}

}  // namespace

SlotCurveSearch slot_curves(std::shared_ptr<const SquareComplex> complex, SurfaceSig surface,
                            std::span<const CurveClass* const> avoid, int budget, std::size_t node_cap) {
  if (budget <= 0) throw std::domain_error("slot_curves: budget must be positive");
  return Enumerator(std::move(complex), surface, avoid, budget, node_cap).run();
}

DistanceBound bounded_distance_search(const CurveClass& a, const CurveClass& b, int max_depth, int budget) {
  if (budget <= 0) throw std::domain_error("bounded_distance_search: budget must be positive");
  if (max_depth < 1) throw std::domain_error("bounded_distance_search: max_depth must be positive");
  if (a.surface() != b.surface() || a.surface().complexity() < 2 || !a.complex() || !b.complex()) {
    throw std::domain_error("bounded_distance_search: needs two curves on one surface of complexity >= 2");
  }
  if (a == b) return {0, 0};
  if (geometric_intersection(a, b) == 0) return {1, 1};
  // Minimal position with i > 0: any essential curve in a non-disk face is a
  // common neighbour distinct from both.
  if (!fills(a, b)) return {2, 2};

  DistanceBound out{3, std::nullopt};
  if (max_depth < 3) return out;
  const auto& complex = a.complex();
  const CurveClass* only_a[] = {&a};
  const CurveClass* only_b[] = {&b};
  const auto near_a = slot_curves(complex, a.surface(), only_a, budget);
  const auto near_b = slot_curves(complex, a.surface(), only_b, budget);
  for (const auto& c1 : near_a.curves) {
    for (const auto& c2 : near_b.curves) {
      if (drawn_crossings(c1, c2) == 0) return {3, 3};
    }
  }
  if (max_depth == 3) return out;

  // Breadth-first search over a pool of witnesses; walks may repeat isotopy
  // classes, which only lengthens them, so every walk found is an upper bound.
  std::vector<CurveClass> pool = {a, b};
  for (const auto& c : near_a.curves) pool.push_back(c);
  for (const auto& c : near_b.curves) pool.push_back(c);
  for (auto& c : low_cores(complex, a.surface())) {
    if (std::find(pool.begin(), pool.end(), c) == pool.end()) pool.push_back(std::move(c));
  }
  constexpr std::size_t pool_cap = 4000;
  if (pool.size() > pool_cap) pool.resize(pool_cap);
  std::vector<int> dist(pool.size(), -1);
  std::deque<std::size_t> queue = {0};
  dist[0] = 0;
  while (!queue.empty()) {
    const auto x = queue.front();
    queue.pop_front();
    if (dist[x] >= max_depth) continue;
    for (std::size_t y = 0; y < pool.size(); ++y) {
      if (dist[y] != -1 || !adjacent(pool[x], pool[y])) continue;
      dist[y] = dist[x] + 1;
      if (y == 1) {
        out.upper = std::max(dist[y], out.lower);
        return out;
      }
      queue.push_back(y);
    }
  }
  return out;
}

}  // namespace cgdist
