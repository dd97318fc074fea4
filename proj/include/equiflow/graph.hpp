#pragma once

#include <vector>

#include "equiflow/network.hpp"

namespace equiflow {

// Per-arc costs, the carrier for -theta, latencies and reduced costs.
using CostVector = std::vector<double>;

struct ShortestPathTree {
    std::vector<double> dist;  // +inf when unreachable
    std::vector<int> pred_arc;  // -1 at the source / unreachable vertices
};

// Nonnegative costs only (throws SolverError otherwise). Ties are broken
// toward the lower predecessor arc id so runs are deterministic.
ShortestPathTree dijkstra(const RoadNetwork& net, const CostVector& costs, int source);

// Arbitrary costs. Throws NegativeCycleError (with one offending cycle) if a
// negative-cost cycle is reachable from the source.
ShortestPathTree bellman_ford(const RoadNetwork& net, const CostVector& costs, int source);

// Arc ids of the tree path source -> target; throws SolverError if unreachable.
std::vector<int> extract_path(const ShortestPathTree& tree, const RoadNetwork& net, int source,
                              int target);

struct PathFlow {
    int commodity = 0;          // index into the caller's commodity list
    std::vector<int> arcs;      // chained tail-to-head, origin -> destination
    double weight = 0.0;        // alpha_P
};

// Linear minimization oracle over one commodity's flow polytope: the
// cheapest origin->destination path carrying the full demand. Dispatches to
// dijkstra when all costs are nonnegative, bellman_ford otherwise.
PathFlow shortest_path_lmo(const RoadNetwork& net, const CostVector& costs,
                           const Commodity& commodity, int commodity_index = 0);

double path_cost(const CostVector& costs, const std::vector<int>& arcs);

// All elementary origin->destination paths with at most max_len arcs, in
// lexicographic arc-id order. Brute-force test oracle; refuses graphs with
// more than 12 vertices.
std::vector<std::vector<int>> enumerate_paths(const RoadNetwork& net, int origin, int destination,
                                              int max_len = -1);

}  // namespace equiflow
