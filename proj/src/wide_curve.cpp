#include "cgdist/wide_curve.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace cgdist {

namespace {

// width^2 = area^2 / circumference^2; the reciprocal as an exact form.
LengthForm inverse_width_form(const FlatCylinder& cyl) {
  const __int128 den = cyl.area.den(), num = cyl.area.num();
  const __int128 scale = cyl.circumference.n * num * num;
  if (scale > std::numeric_limits<std::int64_t>::max()) throw std::overflow_error("cylinder width form overflow");
  return {cyl.circumference.a * den * den, cyl.circumference.b * den * den, static_cast<std::int64_t>(scale)};
}

bool wider(const FlatCylinder& a, const FlatCylinder& b, double t) {
  if (const int c = compare_lengths(inverse_width_form(a), inverse_width_form(b), t); c != 0) return c < 0;
  if (const int c = compare_lengths(a.circumference, b.circumference, t); c != 0) return c < 0;
  if (a.direction != b.direction) return slope_angle_less(a.direction, b.direction);
  return a.core.key() < b.core.key();
}

}  // namespace

long double annulus_width(const CurveClass& c, const FlowPoint& point) {
  if (!c.is_geodesic()) return 0;
  const auto cyl = cylinder_of(c, point);
  // The collar beyond either boundary is empty: boundaries run through cone points.
  return cyl.height();
}

WideCurveChoice upsilon(const FlowPoint& point, double delta) {
  if (!(delta > 0)) throw std::domain_error("upsilon: delta must be positive");
  auto candidates = candidate_cylinders(point, 3.0);
  candidates.push_back(cylinder_of(systole_estimate(point).witness, point));
  const auto best = std::min_element(candidates.begin(), candidates.end(),
                                     [&](const auto& a, const auto& b) { return wider(a, b, point.t); });
  WideCurveChoice out;
  out.curve = best->core;
  out.width = best->height();
  out.kind = WidthKind::flat_cylinder;
  out.below_target = out.width < delta;
  out.achieved_delta = std::min<long double>(out.width, delta);
  return out;
}

}  // namespace cgdist
