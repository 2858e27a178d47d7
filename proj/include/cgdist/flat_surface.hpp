#pragma once

// Square-tiled surfaces and their Teichmueller deformations.
//
// An origami is glued from n unit squares by two permutations h (right
// neighbours) and v (top neighbours). Flowing for time t stretches every
// square to e^t x e^-t; lengths are rescaled by 1/sqrt(n) so the area stays 1.
//
// Two models share this interface. Origamis of complexity at least two mark
// every vertex and carry curves as traced cylinder cores. The once-punctured
// torus (the one-square origami, or the k-square torus realising a pair of
// slopes) is handled through its period lattice: a reference slope v has
// holonomy M v in square units.

#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cgdist/rational.hpp"
#include "cgdist/topology.hpp"

namespace cgdist {

using Cycles = std::vector<std::vector<int>>;  // disjoint-cycle notation, 1-based

enum class OrigamiErrorKind { not_a_permutation, not_transitive, not_one_cylinder };

class OrigamiError : public std::invalid_argument {
 public:
  OrigamiError(OrigamiErrorKind kind, const std::string& what) : std::invalid_argument(what), kind_(kind) {}
  OrigamiErrorKind kind() const { return kind_; }

 private:
  OrigamiErrorKind kind_;
};

/// Integer 2x2 matrix acting on column vectors.
struct Mat2 {
  std::int64_t a = 1, b = 0, c = 0, d = 1;
  std::pair<__int128, __int128> apply(std::int64_t x, std::int64_t y) const {
    return {static_cast<__int128>(a) * x + static_cast<__int128>(b) * y,
            static_cast<__int128>(c) * x + static_cast<__int128>(d) * y};
  }
};

struct ConePoint {
  int vertex = 0;
  int angle_multiple = 1;  ///< cone angle is 2*pi*angle_multiple
};

class Origami {
 public:
  int size() const { return n_; }
  /// Gluing permutations, 0-based. Empty for torus-pair surfaces with more
  /// than max_materialized_squares squares.
  const std::vector<int>& right() const { return right_; }
  const std::vector<int>& up() const { return up_; }
  static constexpr int max_materialized_squares = 4096;
  Cycles h_cycles() const;
  Cycles v_cycles() const;

  /// The complex curves are drawn on: the origami itself, or the unit torus
  /// (reference coordinates) in the lattice model.
  const std::shared_ptr<const SquareComplex>& complex() const { return complex_; }
  const SurfaceSig& surface() const { return surface_; }
  int genus() const { return surface_.genus; }
  /// Vertices of the square tiling, marked or not.
  int vertex_count() const { return vertex_count_; }
  /// Marked vertices with their cone angles.
  std::vector<ConePoint> cone_points() const;

  /// True for the once-punctured torus, which uses the lattice model.
  bool lattice_model() const { return lattice_model_; }
  /// Reference slope v has holonomy periods() * v (lattice model only).
  const Mat2& periods() const { return periods_; }
  /// Horizontal and vertical core classes in reference coordinates (lattice model only).
  const Slope& reference_xi() const { return xi_; }
  const Slope& reference_zeta() const { return zeta_; }

 private:
  friend Origami build_origami(int n, const Cycles& h, const Cycles& v);
  friend Origami torus_pair_origami(const Slope& xi, const Slope& zeta);

  int n_ = 0;
  int vertex_count_ = 0;
  std::vector<int> right_;
  std::vector<int> up_;
  std::shared_ptr<const SquareComplex> complex_;
  SurfaceSig surface_;
  bool lattice_model_ = false;
  Mat2 periods_;
  Slope xi_{1, 0};
  Slope zeta_{0, 1};
};

/// Validated one-cylinder origami. Throws OrigamiError.
Origami build_origami(int n, const Cycles& h, const Cycles& v);

/// The |det|-square torus whose horizontal and vertical cores are the given
/// slopes; only one vertex is marked, so the surface is the once-punctured torus.
Origami torus_pair_origami(const Slope& xi, const Slope& zeta);

/// Squared length (A e^{2t} + B e^{-2t}) / n with exact integer coefficients.
struct LengthForm {
  __int128 a = 0;
  __int128 b = 0;
  std::int64_t n = 1;

  long double squared(double t) const;
  long double value(double t) const;
};

/// Sign of x(t)^2 - y(t)^2, exact: at t = 0 by integer arithmetic, otherwise by
/// multiprecision evaluation (e^{4t} is irrational for rational t != 0, so
/// genuine ties only occur when the coefficient differences vanish).
int compare_lengths(const LengthForm& x, const LengthForm& y, double t);

struct FlowPoint {
  std::shared_ptr<const Origami> origami;
  double t = 0.0;

  double scale() const;
  /// n * scale^2, as an exact rational; always 1.
  Rational normalized_area() const;
};

struct SaddleConnection {
  std::int64_t hol_x = 0;  ///< holonomy in square units
  std::int64_t hol_y = 0;
  int start_vertex = 0;
  int end_vertex = 0;
  std::vector<int> squares;  ///< squares crossed (empty in the lattice model)
  LengthForm length;
};

/// Heights are kept as area / circumference: the height of a cylinder is not a
/// two-coefficient form itself, but both factors are exact.
struct FlatCylinder {
  Slope direction;
  int periods = 1;           ///< copies of the torus line in the core
  LengthForm circumference;  ///< at any time, via circumference.value(t)
  Rational area;             ///< normalized area of the cylinder
  double t = 0.0;
  CurveClass core;

  long double circumference_at() const { return circumference.value(t); }
  long double height() const;
  long double modulus() const;
};

std::pair<CurveClass, CurveClass> core_curves(const Origami& origami);

/// Flat length form of a geodesic representative; combinatorial curves throw
/// std::domain_error("not tightenable").
LengthForm flat_length(const CurveClass& c, const FlowPoint& point);

std::vector<SaddleConnection> enumerate_saddle_connections(const FlowPoint& point, double max_length);

/// Cylinder decomposition in a primitive direction (reference coordinates for
/// the lattice model).
std::vector<FlatCylinder> cylinders_in_direction(const FlowPoint& point, const Slope& direction);

/// Maximal cylinder whose core is c.
FlatCylinder cylinder_of(const CurveClass& c, const FlowPoint& point);

/// Directions (reference slopes in the lattice model) whose period vector has
/// normalized squared length at most `bound_sq`, angle-sorted.
std::vector<Slope> short_directions(const FlowPoint& point, long double bound_sq);
/// Normalized squared length of the primitive period vector of a direction.
LengthForm direction_form(const FlowPoint& point, const Slope& direction);
/// Shortest direction (angle order breaks ties).
Slope shortest_direction(const FlowPoint& point);

/// Cores of all cylinders in directions at most `factor` times the shortest.
std::vector<FlatCylinder> candidate_cylinders(const FlowPoint& point, double factor = 3.0);

struct ExtremalBounds {
  long double lower = 0;
  long double upper = 0;
};
ExtremalBounds extremal_length_bounds(const CurveClass& c, const FlowPoint& point);

enum class Side { left, right };
/// max(0, ln(R / l) / (2 pi)) with R the distance from the cylinder boundary to
/// the nearest marked point on that side; an estimate of the expanding annulus modulus.
long double expanding_annulus_modulus(const CurveClass& c, const FlowPoint& point, Side side);

struct SystoleEstimate {
  long double value = 0;  ///< min extremal-length upper bound: >= the systole
  long double lower = 0;  ///< min squared flat length over the same candidates
  CurveClass witness;
};
SystoleEstimate systole_estimate(const FlowPoint& point);

struct BoundarySide {
  int curve = 0;  ///< index into ThinThick::short_curves
  Side side = Side::left;
};

struct ThinThickComponent {
  int euler = 0;
  int marked = 0;
  int boundary_sides = 0;
  int genus = 0;
  bool pants = false;
  bool whole_surface = false;
  std::vector<BoundarySide> boundary;
  double size = 0;                   ///< flat-length size proxy; diameter proxy for pants
};

struct ThinThick {
  double epsilon = 0;
  std::vector<CurveClass> short_curves;
  std::vector<ThinThickComponent> components;
};

/// Requires 0 < epsilon <= epsilon0. `sc_bound` limits the saddle connections
/// used for the pants diameter proxy.
ThinThick thin_thick(const FlowPoint& point, double epsilon, double epsilon0, double sc_bound = 2.0);

bool is_slim(const CurveClass& c, const FlowPoint& point, double rho);

/// Every boundary curve of the component has expanding-annulus estimate >= M
/// on the component side. Pants and the whole surface are rejected.
bool is_M_large(const ThinThick& decomposition, int component, const FlowPoint& point, double M);

}  // namespace cgdist
