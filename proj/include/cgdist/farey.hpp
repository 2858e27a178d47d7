#pragma once

#include <cstdint>
#include <vector>

#include "cgdist/topology.hpp"

namespace cgdist {

/// Exact distance in the Farey graph (vertices are slopes, edges join p/q and
/// r/s when |ps - qr| = 1).
///
/// The first slope is moved to 1/0 by an integer unimodular map; every geodesic
/// to the image of the second slope then runs through the ladder of triangles
/// cut by the hyperbolic geodesic, whose vertices are the convergents and
/// intermediate fractions of its continued fraction. Within a fan of partial
/// quotient a the rim costs a steps and the pivot two, so the search collapses
/// to a recurrence over the convergents.
int farey_distance(const Slope& a, const Slope& b);

/// Breadth-first search over the finite subgraph of slopes with
/// max(|p|,|q|) <= height_bound. Returns -1 when b is unreachable within
/// max_depth steps. Distances from a fixed source to every slope of the
/// subgraph are available through farey_bfs_all.
int farey_distance_bfs(const Slope& a, const Slope& b, std::int64_t height_bound, int max_depth);

/// All slopes of height <= bound, canonical, sorted.
std::vector<Slope> slopes_up_to_height(std::int64_t bound);

/// Distances from `source` to each entry of `targets` in the height-bounded subgraph.
std::vector<int> farey_bfs_all(const Slope& source, std::int64_t height_bound,
                               const std::vector<Slope>& targets);

/// Compares farey_distance with the height-bounded breadth-first search on all
/// slope pairs of height <= bound (search bound 4x). Cached after the first call.
bool farey_self_test(std::int64_t bound = 12);

}  // namespace cgdist
