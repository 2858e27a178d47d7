#pragma once

// The map from flow points to delta-wide curves: the core of the widest
// embedded annulus among the generated candidates, chosen deterministically.

#include "cgdist/flat_surface.hpp"

namespace cgdist {

enum class WidthKind { flat_cylinder, expanding_collar };

struct WideCurveChoice {
  CurveClass curve;
  long double width = 0;
  WidthKind kind = WidthKind::flat_cylinder;
  long double achieved_delta = 0;  ///< min(width, delta)
  bool below_target = false;       ///< width < delta
};

/// Height of the maximal flat cylinder of c plus the collars beyond it (the
/// distance from each boundary to the nearest cone point). Curves without a
/// geodesic representative get 0.
long double annulus_width(const CurveClass& c, const FlowPoint& point);

/// Widest candidate; ties go to the shorter curve, then to the smaller angle
/// from the horizontal, then to the curve key. Never fails: a maximum below
/// delta is returned with below_target set.
WideCurveChoice upsilon(const FlowPoint& point, double delta);

}  // namespace cgdist
