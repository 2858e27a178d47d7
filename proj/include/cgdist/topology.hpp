#pragma once

// Exact combinatorial topology of simple closed curves carried on a square
// complex: intersection numbers, filling, complement analysis, and the
// distance primitives used by the estimator.

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cgdist/rational.hpp"

namespace cgdist {

struct SurfaceSig {
  int genus = 0;
  int punctures = 0;

  int complexity() const { return 3 * genus - 3 + punctures; }
  friend bool operator==(const SurfaceSig&, const SurfaceSig&) = default;
};

/// Primitive integer vector up to sign. (p, q) is read as the Farey fraction
/// p/q; canonical form has q > 0, or q == 0 and p == 1.
struct Slope {
  std::int64_t p = 1;
  std::int64_t q = 0;

  friend bool operator==(const Slope&, const Slope&) = default;
  std::string str() const { return std::to_string(p) + "/" + std::to_string(q); }
};

/// Throws std::domain_error unless gcd(|p|,|q|) == 1.
Slope make_slope(std::int64_t p, std::int64_t q);

/// Orders slopes by angle from the horizontal in [0, pi): (1,0) first.
bool slope_angle_less(const Slope& a, const Slope& b);

/// |ps - qr| for two vectors.
std::int64_t slope_det(const Slope& a, const Slope& b);

/// Unit squares glued by two permutations: right(s) is the square to the right
/// of s, up(s) the square above. Labels are 0-based. Vertices of the complex
/// are the orbits of corners; each carries a marked flag.
class SquareComplex {
 public:
  SquareComplex(std::vector<int> right, std::vector<int> up);
  SquareComplex(std::vector<int> right, std::vector<int> up, std::vector<bool> marked);

  int size() const { return static_cast<int>(right_.size()); }
  int right(int s) const { return right_[s]; }
  int left(int s) const { return left_[s]; }
  int up(int s) const { return up_[s]; }
  int down(int s) const { return down_[s]; }

  /// Vertex at the lower-left corner of square s.
  int corner_vertex(int s) const { return corner_vertex_[s]; }
  int vertex_count() const { return static_cast<int>(vertex_corners_.size()); }
  /// Number of lower-left corners glued into vertex; the cone angle is 2*pi times this.
  int vertex_multiplicity(int vertex) const { return vertex_corners_[vertex]; }
  bool marked(int vertex) const { return marked_[vertex]; }
  int marked_count() const;

  friend bool operator==(const SquareComplex& a, const SquareComplex& b) {
    return a.right_ == b.right_ && a.up_ == b.up_ && a.marked_ == b.marked_;
  }

 private:
  std::vector<int> right_, left_, up_, down_;
  std::vector<int> corner_vertex_;
  std::vector<int> vertex_corners_;
  std::vector<bool> marked_;
};

/// The one-square torus; its single vertex is marked.
std::shared_ptr<const SquareComplex> unit_torus_complex();

struct Point {
  Rational x;
  Rational y;
  friend bool operator==(const Point&, const Point&) = default;
  friend auto operator<=>(const Point& a, const Point& b) {
    if (auto c = a.x <=> b.x; c != 0) return c;
    return a.y <=> b.y;
  }
};

/// Straight piece of a curve inside one square; endpoints lie on the square's
/// boundary (coordinates in [0,1]^2).
struct Segment {
  int square = 0;
  Point from;
  Point to;
};

/// Straight closed line in a primitive direction through the cylinder midline,
/// started at the lower edge (or left edge, for horizontal lines) of
/// start_square. `visited` lists the squares where the line passes its base
/// point; its length is the number of periods.
struct TracedLine {
  std::vector<Segment> segments;
  std::vector<int> visited;
};
TracedLine trace_closed_line(const SquareComplex& complex, const Slope& direction, int start_square);

enum class CurveKind {
  slope,          ///< class on a complexity-one torus, given by its slope
  core,           ///< flat cylinder core: a closed straight geodesic
  combinatorial,  ///< drawn polygonal curve, not necessarily geodesic
};

/// An essential simple closed curve. Immutable.
class CurveClass {
 public:
  /// Curve of the given slope on the once-punctured torus.
  static CurveClass from_slope(const Slope& slope);
  /// Cylinder core in `direction` on `complex`; `traced` comes from trace_closed_line.
  static CurveClass core(std::shared_ptr<const SquareComplex> complex, SurfaceSig surface,
                         const Slope& direction, TracedLine traced);
  /// Drawn simple closed curve (cyclic segment list).
  static CurveClass combinatorial(std::shared_ptr<const SquareComplex> complex, SurfaceSig surface,
                                  std::vector<Segment> segments);

  CurveKind kind() const { return kind_; }
  const SurfaceSig& surface() const { return surface_; }
  const std::shared_ptr<const SquareComplex>& complex() const { return complex_; }
  const std::optional<Slope>& slope() const { return slope_; }
  /// Direction of the geodesic representative (cores only).
  const std::optional<Slope>& direction() const { return direction_; }
  /// Number of periods of the underlying torus line (cores only).
  int periods() const { return periods_; }
  bool is_geodesic() const { return kind_ != CurveKind::combinatorial; }
  /// Canonical identity: equal keys mean equal isotopy classes for geodesic
  /// representatives and identical drawings for combinatorial ones.
  const std::string& key() const { return key_; }
  std::span<const Segment> segments() const { return segments_; }

  friend bool operator==(const CurveClass& a, const CurveClass& b) { return a.key_ == b.key_; }

 private:
  CurveKind kind_ = CurveKind::slope;
  SurfaceSig surface_;
  std::shared_ptr<const SquareComplex> complex_;
  std::vector<Segment> segments_;
  std::optional<Slope> slope_;
  std::optional<Slope> direction_;
  int periods_ = 1;
  std::string key_;
};

/// Segments of the unit-torus core of a slope.
std::vector<Segment> torus_core_segments(const Slope& slope);

/// Number of points where the drawn representatives meet (touching counts).
std::int64_t drawn_crossings(const CurveClass& a, const CurveClass& b);

/// Minimal intersection number i(a,b). Geodesic representatives are already in
/// minimal position; for combinatorial curves only a drawn-disjoint answer is
/// certified, anything else throws std::domain_error("not tightenable").
std::int64_t geometric_intersection(const CurveClass& a, const CurveClass& b);

/// One connected component of the complement of a family of curves, viewed in
/// the closed surface (marked points filled in).
struct ComplementFace {
  int euler = 0;        ///< compactly supported Euler characteristic; 1 iff open disk
  int marked = 0;       ///< marked points inside
  int boundary_sides = 0;  ///< curve sides adjacent to this face (pairwise disjoint curves only)
  std::vector<int> vertices;
};

/// Faces of the complement of the given drawn curves on `complex`. Faces that
/// do not meet any square edge (interior cells cut out by crossings inside a
/// single square) are unpunctured disks and are omitted.
std::vector<ComplementFace> complement_faces(const SquareComplex& complex,
                                             std::span<const CurveClass* const> curves);

/// Face index containing each side of each curve (left, right) at its first segment.
std::vector<std::pair<int, int>> curve_side_faces(const SquareComplex& complex,
                                                  std::span<const CurveClass* const> curves);

/// Face index (numbered as in complement_faces) of each probe, a point on the
/// boundary of a square given as (square, point); -1 when it lies on a curve.
std::vector<int> probe_faces(const SquareComplex& complex, std::span<const CurveClass* const> curves,
                             std::span<const std::pair<int, Point>> probes);

/// True unless some complementary face of c is a disk with at most one marked point.
bool is_essential(const CurveClass& c);

/// Every complementary component of a u b is a disk or once-punctured disk.
/// Requires complexity >= 2 and a != b.
bool fills(const CurveClass& a, const CurveClass& b);

/// Curve-graph distance at least three.
bool distance_geq3(const CurveClass& a, const CurveClass& b);

struct DistanceBound {
  int lower = 0;
  std::optional<int> upper;  ///< nullopt when unknown
  bool certified() const { return upper && *upper == lower; }
};

/// Bounds on the curve-graph distance for complexity >= 2 (see witness_search.cpp).
DistanceBound bounded_distance_search(const CurveClass& a, const CurveClass& b, int max_depth, int budget);

/// floor(i(a,b) / (i(a,core) * i(b,core))), a coarse proxy for the diameter of
/// the annular projection to `core`. Throws std::domain_error when a or b is
/// disjoint from the core.
std::int64_t annular_twist_bound(const CurveClass& core, const CurveClass& a, const CurveClass& b);

}  // namespace cgdist
