#pragma once

// Enumeration of small drawn curves used as witnesses for upper bounds on
// curve-graph distance.

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "cgdist/topology.hpp"

namespace cgdist {

/// Simple closed curves made of straight chords between "slots" (the points
/// k/5, k = 1..4, of every square edge), with at most `budget` chords, no
/// chord joining two points of the same side, and no point shared with any
/// curve in `avoid`. Only essential curves are returned, each once.
/// Core lines never pass through a slot (their edge crossings have even
/// denominators), so avoiding a core is the same as being disjoint from it.
struct SlotCurveSearch {
  std::vector<CurveClass> curves;
  bool complete = true;  ///< false when the node cap stopped the search
  std::size_t expanded = 0;
};

SlotCurveSearch slot_curves(std::shared_ptr<const SquareComplex> complex, SurfaceSig surface,
                            std::span<const CurveClass* const> avoid, int budget,
                            std::size_t node_cap = 2'000'000);

}  // namespace cgdist
